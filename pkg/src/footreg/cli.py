"""Command-line interface and batch driver.

``footreg regularize`` (also installed as plain ``regularize``) cleans every
polygon in a file; ``footreg synth`` writes a synthetic corpus. Exit codes:
0 when every feature came through cleanly, 2 when at least one feature was
downgraded or carries a warning, 1 on a fatal I/O or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .despike import SpikeConfig
from .errors import FootregError, IoError
from .io import FeatureRecord, Format, corpus_records, read_features, write_features
from .pipeline import CornerMode, PipelineConfig, regularize
from .report import FeatureOutcome, write_report
from .simplify import DEFAULT_EPSILON, PRESETS, SimplifyConfig
from .svg import render_svg
from .synth import SHAPES, make_corpus

log = logging.getLogger("footreg")

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_DOWNGRADED = 2

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


@dataclass(frozen=True)
class CorpusSpec:
    """Parameters of a generated input corpus, parsed from ``key=value,...``."""

    count: int = 100
    seed: int = 0
    fixed: dict = field(default_factory=dict)

    _INT = ("burr_count", "corners")
    _FLOAT = ("gsd", "rotation", "burr_amplitude", "burr_base")

    @classmethod
    def parse(cls, text: str) -> "CorpusSpec":
        count, seed, fixed = 100, 0, {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, sep, value = item.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ValueError(f"corpus spec item {item!r} is not key=value")
            value = value.strip()
            if key == "count":
                count = int(value)
            elif key == "seed":
                seed = int(value)
            elif key == "shape":
                fixed["shape"] = value
            elif key == "staircase":
                fixed["staircase"] = value.lower() in ("1", "true", "yes")
            elif key == "burr_count" and ":" in value:
                lo, hi = (int(v) for v in value.split(":"))
                fixed["burr_count"] = (lo, hi)
            elif key in cls._INT:
                fixed[key] = int(value)
            elif key in cls._FLOAT:
                fixed[key] = float(value)
            else:
                raise ValueError(f"unknown corpus spec key {key!r}")
        if count < 1:
            raise ValueError("corpus count must be at least 1")
        return cls(count, seed, fixed)

    def records(self) -> list[FeatureRecord]:
        cases = make_corpus(self.count, self.seed, **self.fixed)
        return [r for r in corpus_records(cases) if r.properties["role"] == "noisy"]


@dataclass(frozen=True)
class JobConfig:
    input_path: str | None
    output_path: str
    report_path: str | None = None
    svg_path: str | None = None
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    parallelism: int = 1
    input_format: Format | None = None
    output_format: Format | None = None
    figure_dir: str | None = None
    corpus: CorpusSpec | None = None

    def __post_init__(self):
        if self.input_path is None and self.corpus is None:
            raise ValueError("an input path or a corpus spec is required")
        for name in ("input_path", "output_path", "report_path", "svg_path", "figure_dir"):
            value = getattr(self, name)
            if value is not None and not str(value).strip():
                raise ValueError(f"{name} must not be empty")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")


def regularize_feature(record: FeatureRecord, cfg: PipelineConfig) -> FeatureOutcome:
    """Regularize the exterior and each hole independently; never raises."""
    try:
        exterior = regularize(record.exterior, cfg)
        holes = tuple(regularize(h, cfg) for h in record.holes)
    except Exception as exc:  # a per-feature bug must not end the batch
        log.exception("feature %s: unexpected error", record.id)
        return FeatureOutcome(record.id, None, (), f"{type(exc).__name__}: {exc}")
    return FeatureOutcome(record.id, exterior, holes)


def _regularize_task(args) -> FeatureOutcome:
    return regularize_feature(*args)


def _output_record(record: FeatureRecord, outcome: FeatureOutcome) -> FeatureRecord:
    if outcome.exterior is None:
        return record
    return FeatureRecord(record.id, outcome.exterior.ring, tuple(h.ring for h in outcome.holes), record.properties)


def _file_stem(k: int, fid: str) -> str:
    return f"{k:04d}_" + re.sub(r"[^A-Za-z0-9._-]+", "_", fid)[:80]


def run_job(cfg: JobConfig) -> int:
    """Read, regularize, write; returns the process exit code."""
    try:
        if cfg.corpus is not None:
            records = cfg.corpus.records()
        else:
            records = read_features(cfg.input_path, cfg.input_format, skip_unsupported=True)
    except (FootregError, ValueError) as exc:
        log.error("cannot load input: %s", exc)
        return EXIT_FATAL

    tasks = [(r, cfg.pipeline) for r in records]
    if cfg.parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            # map() yields in submission order, whatever order workers finish in.
            outcomes = list(pool.map(_regularize_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.parallelism))))
    else:
        outcomes = [_regularize_task(t) for t in tasks]

    try:
        write_features([_output_record(r, o) for r, o in zip(records, outcomes)], cfg.output_path, cfg.output_format)
        if cfg.report_path:
            csv_path = write_report(outcomes, cfg.report_path)
            from .plotting import plot_batch_summary

            plot_batch_summary(
                [o.summary_row() for o in outcomes if o.exterior is not None],
                Path(cfg.report_path).with_suffix(".png"),
            )
            log.info("report written to %s and %s", cfg.report_path, csv_path)
        if cfg.svg_path or cfg.figure_dir:
            _render_visuals(records, outcomes, cfg)
    except (FootregError, ValueError, OSError) as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_FATAL

    flagged = [o for o in outcomes if o.status != "ok"]
    for o in flagged:
        detail = o.error or "; ".join(w for r in o.rings() for w in r.provenance.warnings)
        log.warning("feature %s %s: %s", o.id, o.status, detail)
    log.info("%d features processed, %d flagged", len(outcomes), len(flagged))
    return EXIT_DOWNGRADED if flagged else EXIT_OK


def _render_visuals(records, outcomes, cfg: JobConfig) -> None:
    if cfg.figure_dir:
        from .plotting import plot_overlay
    for k, (record, outcome) in enumerate(zip(records, outcomes)):
        if outcome.exterior is None:
            continue
        stem = _file_stem(k, record.id)
        if cfg.svg_path:
            render_svg(record, outcome.exterior, Path(cfg.svg_path) / f"{stem}.svg",
                       after_holes=outcome.holes, title=record.id)
        if cfg.figure_dir:
            spikes = [v.position for r in outcome.rings() for v in r.provenance.spike_verdicts if v.removed]
            plot_overlay(record.rings(), [r.ring for r in outcome.rings()], spikes,
                         Path(cfg.figure_dir) / f"{stem}.png", title=record.id)


# -- argument parsing ---------------------------------------------------------


def _add_regularize_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="input", help="input file (GeoJSON, WKT lines or CSV-xy)")
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--format", choices=[f.value for f in Format],
                   help="file format for input and output (default: from the file extensions)")
    eps = p.add_mutually_exclusive_group()
    eps.add_argument("--eps", type=float, help=f"simplification tolerance in meters (default {DEFAULT_EPSILON})")
    eps.add_argument("--preset", choices=sorted(PRESETS), help="named tolerance: cadastral 0.1 m, planning 1.0 m")
    defaults = SpikeConfig()
    p.add_argument("--spike-angle", type=float, default=defaults.max_angle, help="sharp-angle threshold, degrees")
    p.add_argument("--spike-edge", type=float, help=f"short-edge threshold, meters (default {defaults.max_edge})")
    p.add_argument("--spike-area", type=float, default=defaults.max_area, help="tiny-area threshold, square meters")
    p.add_argument("--min-criteria", type=int, default=defaults.min_criteria,
                   help="criteria that must fire together to remove a vertex")
    p.add_argument("--gsd", type=float, help="source pixel size; sets the short-edge threshold to 2*gsd")
    p.add_argument("--corner-mode", choices=["intersect", "project"], default="intersect")
    p.add_argument("--order", choices=["despike-first", "dp-first"], default="despike-first")
    p.add_argument("--report", help="JSON report path; a CSV summary and a PNG overview are written next to it")
    p.add_argument("--svg-dir", help="directory for one before/after SVG per feature")
    p.add_argument("--figure-dir", help="directory for one before/after PNG per feature")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--seed-corpus", metavar="SPEC",
                   help="generate the input instead of reading it, e.g. count=100,seed=7,shape=lshape,burr_count=5")


def _add_synth_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output file")
    p.add_argument("--format", choices=[f.value for f in Format])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", choices=SHAPES, default="lshape")
    p.add_argument("--gsd", type=float, default=0.25)
    p.add_argument("--rotation", type=float, help="fixed rotation in degrees (default: uniform in [0, 90))")
    p.add_argument("--burrs", default="0", help="burr count, or a lo:hi range")
    p.add_argument("--amplitude", type=float, default=0.4, help="burr height, meters")
    p.add_argument("--base", type=float, default=0.15, help="burr base width, meters")
    p.add_argument("--corners", type=int, default=8, help="corner count for random_orthogonal")
    p.add_argument("--no-staircase", action="store_true", help="skip rasterization; burrs go on the clean outline")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 (fatal config error); argparse's own 2 means "downgraded" here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FATAL, f"{self.prog}: error: {message}\n")


def build_parser(prog: str = "footreg") -> argparse.ArgumentParser:
    parser = _Parser(prog=prog, description="Regularize noisy building-footprint polygons.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_regularize_args(sub.add_parser("regularize", help="clean every polygon in a file"))
    _add_synth_args(sub.add_parser("synth", help="write a synthetic footprint corpus"))
    return parser


def pipeline_config(args) -> PipelineConfig:
    if args.preset:
        simplify = SimplifyConfig.preset(args.preset)
    else:
        simplify = SimplifyConfig(DEFAULT_EPSILON if args.eps is None else args.eps)
    if args.spike_edge is not None:
        edge = args.spike_edge
    elif args.gsd is not None:
        edge = SpikeConfig.for_gsd(args.gsd).max_edge
    else:
        edge = SpikeConfig().max_edge
    spike = SpikeConfig(
        max_angle=args.spike_angle, max_edge=edge, max_area=args.spike_area, min_criteria=args.min_criteria
    )
    return PipelineConfig(
        simplify=simplify,
        spike=spike,
        despike_before_simplify=args.order == "despike-first",
        corner_mode=CornerMode(args.corner_mode),
    )


def job_config(args) -> JobConfig:
    fmt = Format(args.format) if args.format else None
    corpus = CorpusSpec.parse(args.seed_corpus) if args.seed_corpus else None
    if args.input is None and corpus is None:
        raise ValueError("give --in or --seed-corpus")
    return JobConfig(
        input_path=args.input,
        output_path=args.out,
        report_path=args.report,
        svg_path=args.svg_dir,
        pipeline=pipeline_config(args),
        parallelism=args.jobs,
        input_format=fmt,
        output_format=fmt,
        figure_dir=args.figure_dir,
        corpus=corpus,
    )


def _synth(args) -> int:
    burrs = args.burrs
    fixed = {
        "shape": args.shape,
        "gsd": args.gsd,
        "burr_amplitude": args.amplitude,
        "burr_base": args.base,
        "corners": args.corners,
        "staircase": not args.no_staircase,
    }
    if ":" in burrs:
        lo, hi = (int(v) for v in burrs.split(":"))
        fixed["burr_count"] = (lo, hi)
    else:
        fixed["burr_count"] = int(burrs)
    if args.rotation is not None:
        fixed["rotation"] = args.rotation
    cases = make_corpus(args.count, args.seed, **fixed)
    write_features(corpus_records(cases), args.out, Format(args.format) if args.format else None)
    log.info("wrote %d cases to %s", len(cases), args.out)
    return EXIT_OK


def configure_logging() -> None:
    name = os.environ.get("REGULARIZE_LOG", "warn").strip().lower()
    level = LOG_LEVELS.get(name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if name not in LOG_LEVELS:
        log.warning("REGULARIZE_LOG=%r is not one of %s; using warn", name, ", ".join(LOG_LEVELS))


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _synth(args)
        return run_job(job_config(args))
    except (ValueError, IoError, FootregError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


def regularize_main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the stand-alone ``regularize`` command."""
    argv = list(sys.argv[1:] if argv is None else argv)
    return main(["regularize", *argv])


if __name__ == "__main__":
    sys.exit(main())

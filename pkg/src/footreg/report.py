"""Batch report: per-feature outcomes, the JSON report and a CSV summary."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from .errors import IoError
from .pipeline import RegularizedRing

SUMMARY_COLUMNS = (
    "id",
    "status",
    "input_vertices",
    "output_vertices",
    "spikes_removed",
    "max_deviation",
    "area_before",
    "area_after",
    "area_change_pct",
    "warnings",
)


@dataclass(frozen=True)
class FeatureOutcome:
    id: str
    exterior: RegularizedRing | None
    holes: tuple[RegularizedRing, ...] = ()
    error: str | None = None

    def rings(self) -> list[RegularizedRing]:
        return [] if self.exterior is None else [self.exterior, *self.holes]

    @property
    def status(self) -> str:
        if self.error is not None or self.exterior is None:
            return "error"
        reports = [r.provenance for r in self.rings()]
        if any(r.failed_stage is not None for r in reports):
            return "failed"
        if any(r.warnings for r in reports):
            return "warned"
        return "ok"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "exterior": None if self.exterior is None else self.exterior.provenance.to_dict(),
            "holes": [h.provenance.to_dict() for h in self.holes],
            "error": self.error,
        }

    def summary_row(self) -> dict:
        row = {"id": self.id, "status": self.status}
        if self.exterior is None:
            return {**row, **{k: "" for k in SUMMARY_COLUMNS[2:-1]}, "warnings": self.error or ""}
        rep = self.exterior.provenance
        change = 100.0 * (rep.area_after - rep.area_before) / rep.area_before if rep.area_before else 0.0
        warnings = [w for r in self.rings() for w in r.provenance.warnings]
        return {
            **row,
            "input_vertices": rep.input_vertex_count,
            "output_vertices": rep.output_vertex_count,
            "spikes_removed": sum(v.removed for r in self.rings() for v in r.provenance.spike_verdicts),
            "max_deviation": round(rep.max_deviation, 9),
            "area_before": round(rep.area_before, 6),
            "area_after": round(rep.area_after, 6),
            "area_change_pct": round(change, 6),
            "warnings": "; ".join(warnings),
        }


def report_json(outcomes: Sequence[FeatureOutcome]) -> str:
    return json.dumps([o.to_dict() for o in outcomes], indent=1, allow_nan=False) + "\n"


def summary_csv(outcomes: Sequence[FeatureOutcome]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for o in outcomes:
        writer.writerow(o.summary_row())
    return buf.getvalue()


def write_report(outcomes: Sequence[FeatureOutcome], path) -> Path:
    """Write the JSON report and, next to it, a CSV summary; returns the CSV path."""
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report_json(outcomes), encoding="utf-8")
        csv_path.write_text(summary_csv(outcomes), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write report {path}: {exc.strerror or exc}") from exc
    return csv_path


def load_schema() -> dict:
    text = resources.files("footreg").joinpath("schema/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)

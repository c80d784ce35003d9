import csv
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from footreg.cli import CorpusSpec, JobConfig, build_parser, job_config, main, regularize_main
from footreg.io import Format, read_features
from footreg.report import SUMMARY_COLUMNS, load_schema


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "corpus.geojson"
    code = main(["synth", "--out", str(path), "--count", "100", "--seed", "5", "--shape", "lshape",
                 "--burrs", "1:8"])
    assert code == 0
    return path


@pytest.fixture(scope="module")
def noisy_file(corpus_file):
    # The synth output holds clean and noisy rings; keep the noisy ones as input.
    from footreg.io import write_features

    noisy = [r for r in read_features(corpus_file) if r.properties["role"] == "noisy"]
    path = corpus_file.with_name("noisy.geojson")
    write_features(noisy, path)
    return path


def test_synth_writes_clean_and_noisy(corpus_file):
    records = read_features(corpus_file)
    assert len(records) == 200
    assert [r.id for r in records[:2]] == ["0/clean", "0/noisy"]
    noisy = records[1]
    assert 1 <= len(noisy.properties["burr_indices"]) <= 8
    assert noisy.properties["spec"]["shape"] == "lshape"


def test_batch_of_100(tmp_path, noisy_file):
    out, report = tmp_path / "out.geojson", tmp_path / "report.json"
    code = main(["regularize", "--in", str(noisy_file), "--out", str(out), "--report", str(report)])
    assert code == 0
    outputs = read_features(out)
    assert len(outputs) == 100
    assert all(len(r.exterior) == 6 for r in outputs)
    entries = json.loads(report.read_text())
    assert len(entries) == 100
    jsonschema.validate(entries, load_schema())
    assert [e["id"] for e in entries] == [r.id for r in outputs]
    # Properties ride along untouched.
    assert outputs[0].properties["role"] == "noisy"

    rows = list(csv.DictReader(report.with_suffix(".csv").open()))
    assert tuple(rows[0]) == SUMMARY_COLUMNS
    assert len(rows) == 100 and all(r["status"] == "ok" for r in rows)
    assert report.with_suffix(".png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_jobs_keep_order(tmp_path, noisy_file):
    one, two = tmp_path / "one.wkt", tmp_path / "two.wkt"
    assert main(["regularize", "--in", str(noisy_file), "--out", str(one), "--jobs", "1"]) == 0
    assert main(["regularize", "--in", str(noisy_file), "--out", str(two), "--jobs", "2"]) == 0
    assert one.read_bytes() == two.read_bytes()


def test_bowtie_is_downgraded(tmp_path):
    src = tmp_path / "in.wkt"
    src.write_text("ok\tPOLYGON ((0 0, 30 0, 30 12, 0 12, 0 0))\t\nbow\tPOLYGON ((0 0, 4 4, 4 0, 0 6, 0 0))\t\n")
    report = tmp_path / "r.json"
    assert main(["regularize", "--in", str(src), "--out", str(tmp_path / "out.wkt"), "--report", str(report)]) == 2
    statuses = {e["id"]: e["status"] for e in json.loads(report.read_text())}
    assert statuses == {"ok": "ok", "bow": "warned"}
    jsonschema.validate(json.loads(report.read_text()), load_schema())


def test_missing_input_is_fatal(tmp_path):
    code = main(["regularize", "--in", str(tmp_path / "missing.geojson"), "--out", str(tmp_path / "o.geojson")])
    assert code == 1
    assert not (tmp_path / "o.geojson").exists()


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["regularize", "--out", "x.geojson", "--eps", "0.5", "--preset", "cadastral"])
    assert info.value.code == 1
    assert "not allowed with" in capsys.readouterr().err
    assert main(["regularize", "--out", "x.geojson"]) == 1
    assert main(["regularize", "--in", "a.geojson", "--out", "x.geojson", "--eps", "-1"]) == 1


def test_svg_and_figures(tmp_path):
    svgs, figs = tmp_path / "svg", tmp_path / "fig"
    code = main(["regularize", "--seed-corpus", "count=3,seed=2,shape=rectangle,burr_count=2",
                 "--out", str(tmp_path / "o.csv"), "--svg-dir", str(svgs), "--figure-dir", str(figs)])
    assert code == 0
    assert sorted(p.name for p in svgs.iterdir()) == ["0000_0_noisy.svg", "0001_1_noisy.svg", "0002_2_noisy.svg"]
    assert len(list(figs.glob("*.png"))) == 3
    assert len(read_features(tmp_path / "o.csv")) == 3


def test_flags_map_to_config():
    args = build_parser().parse_args([
        "regularize", "--in", "a.wkt", "--out", "b.geojson", "--eps", "0.3", "--spike-angle", "25",
        "--gsd", "0.4", "--spike-area", "0.2", "--min-criteria", "4", "--corner-mode", "project",
        "--order", "dp-first", "--jobs", "3", "--format", "wkt",
    ])
    cfg = job_config(args)
    p = cfg.pipeline
    assert p.simplify.epsilon == 0.3
    assert (p.spike.max_angle, p.spike.max_edge, p.spike.max_area, p.spike.min_criteria) == (25, 0.8, 0.2, 4)
    assert p.corner_mode.value == "project" and not p.despike_before_simplify
    assert cfg.parallelism == 3 and cfg.input_format is Format.WKT


def test_defaults_mirror_module_defaults():
    from footreg.pipeline import PipelineConfig

    cfg = job_config(build_parser().parse_args(["regularize", "--in", "a.geojson", "--out", "b.geojson"]))
    assert cfg.pipeline == PipelineConfig()
    assert cfg.parallelism == 1


def test_corpus_spec_parse():
    spec = CorpusSpec.parse("count=4, seed=9, shape=pentagon, burr_count=1:3, gsd=0.5, staircase=false")
    assert (spec.count, spec.seed) == (4, 9)
    assert spec.fixed == {"shape": "pentagon", "burr_count": (1, 3), "gsd": 0.5, "staircase": False}
    assert len(spec.records()) == 4
    for bad in ("count=0", "colour=red", "seed"):
        with pytest.raises(ValueError):
            CorpusSpec.parse(bad)


def test_job_config_validation():
    with pytest.raises(ValueError):
        JobConfig(None, "out.geojson")
    with pytest.raises(ValueError):
        JobConfig("in.geojson", "out.geojson", parallelism=0)
    with pytest.raises(ValueError):
        JobConfig("in.geojson", " ")


def test_regularize_entry_point(tmp_path):
    src = tmp_path / "in.wkt"
    src.write_text("POLYGON ((0 0, 30 0, 30 12, 0 12, 0 0))\n")
    assert regularize_main(["--in", str(src), "--out", str(tmp_path / "o.wkt")]) == 0


def run_cli(args, level):
    env = {**os.environ, "REGULARIZE_LOG": level}
    return subprocess.run([sys.executable, "-m", "footreg.cli", *args], capture_output=True, text=True, env=env)


def test_log_level_from_environment(tmp_path):
    src = tmp_path / "in.wkt"
    src.write_text("POLYGON ((0 0, 30 0, 30 12, 0 12, 0 0))\n")
    args = ["regularize", "--in", str(src), "--out", str(tmp_path / "o.wkt")]
    quiet = run_cli(args, "warn")
    loud = run_cli(args, "info")
    assert quiet.returncode == loud.returncode == 0
    assert quiet.stderr == ""
    assert "1 features processed" in loud.stderr


def test_missing_input_message_on_stderr(tmp_path):
    done = run_cli(["regularize", "--in", str(tmp_path / "nope.wkt"), "--out", str(tmp_path / "o.wkt")], "error")
    assert done.returncode == 1
    assert "cannot load input" in done.stderr

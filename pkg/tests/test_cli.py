import csv
import json
from fractions import Fraction

import pytest

from fmeco.cli import main

from .conftest import FIXTURES, MANIFEST


def subset(tmp_path, *names, extra=()):
    """Write a manifest holding the named fixture entries, with absolute paths."""
    chosen = []
    for d in json.loads(MANIFEST.read_text())["datasets"]:
        if d["name"] in names:
            chosen.append(dict(d, path=str(FIXTURES / d["path"])))
    chosen.extend(extra)
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps({"datasets": chosen}))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_homogenize_toy_matrix(tmp_path, capsys):
    m = subset(tmp_path, "toy-matrix")
    code, out, _ = run(capsys, "homogenize", "--manifest", m, "--out", tmp_path / "o")
    assert code == 0
    for name in ("homogenization_summary.csv", "homogenization_rates.csv",
                 "homogenization_distribution.csv", "homogenize.json", "homogenize.md"):
        assert (tmp_path / "o" / name).is_file()
    summary = read_csv(tmp_path / "o" / "homogenization_summary.csv")[0]
    assert summary["instances"] == "10" and summary["models"] == "3"
    assert float(summary["systemic_failure_rate"]) == pytest.approx(0.2)
    dist = read_csv(tmp_path / "o" / "homogenization_distribution.csv")
    assert sum(float(r["observed"]) for r in dist) == pytest.approx(1, abs=1e-12)
    assert sum(float(r["baseline"]) for r in dist) == pytest.approx(1, abs=1e-12)
    assert "# fmeco homogenize" in out


def test_metrics_without_confidences_notes_the_skip(tmp_path, capsys):
    m = subset(tmp_path, "summarization-model-a", "summarization-model-b")
    code, out, _ = run(capsys, "metrics", "--manifest", m, "--out", tmp_path / "o", "--format", "json")
    assert code == 0
    report = json.loads((tmp_path / "o" / "metrics.json").read_text())
    statuses = {n["section"]: n["status"] for n in report["notes"]}
    assert statuses["calibration (summarization-model-a)"] == "skipped: no confidences"
    assert statuses["toxicity"] == "skipped: no scorer configured"
    row = report["tables"]["metrics_summary"][0]
    assert row["ece"] is None and row["rouge_2"] is not None
    assert "missing" in out


def test_metrics_with_mock_toxicity(tmp_path, capsys):
    m = subset(tmp_path, "summarization-model-a", "summarization-model-b")
    code, _, _ = run(capsys, "metrics", "--manifest", m, "--out", tmp_path / "o", "--toxicity", "mock", "--quiet")
    assert code == 0
    rows = read_csv(tmp_path / "o" / "metrics_summary.csv")
    assert all(r["toxicity_rate"] == "0.0" for r in rows)


def test_http_toxicity_needs_key(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("FMECO_TOXICITY_API_KEY", raising=False)
    m = subset(tmp_path, "summarization-model-a")
    code, _, err = run(capsys, "metrics", "--manifest", m, "--out", tmp_path / "o",
                       "--toxicity", "http", "--toxicity-endpoint", "http://127.0.0.1:9")
    assert code == 2 and "FMECO_TOXICITY_API_KEY" in json.loads(err)["message"]


def test_index_aggregate_all_ones(tmp_path, capsys):
    m = subset(tmp_path, "fmti-schema", "fmti-all-ones")
    code, out, _ = run(capsys, "index", "aggregate", "--manifest", m, "--out", tmp_path / "o")
    assert code == 0
    rows = read_csv(tmp_path / "o" / "index_aggregate.csv")
    overall = [r for r in rows if r["level"] == "overall"]
    assert len(overall) == 1 and float(overall[0]["points"]) == 100
    assert "| fmti | 2024 | all-ones | overall | 100 |" in out


def test_index_resolve_writes_resolved_sheet(tmp_path, capsys):
    m = subset(tmp_path, "fmti-schema", "fmti-2024-atlas-rater-1", "fmti-2024-atlas-rater-2")
    code, _, _ = run(capsys, "index", "resolve", "--manifest", m, "--out", tmp_path / "o",
                     "--resolutions", FIXTURES / "index" / "resolutions.json", "--quiet")
    assert code == 0
    resolved = tmp_path / "o" / "resolved" / "resolved_fmti_2024_atlas.csv"
    rows = read_csv(resolved)
    assert len(rows) == 100 and all(r["score"] in ("0", "1") for r in rows)


def test_index_resolve_without_resolutions_is_a_data_error(tmp_path, capsys):
    m = subset(tmp_path, "fmti-schema", "fmti-2024-atlas-rater-1", "fmti-2024-atlas-rater-2")
    code, _, err = run(capsys, "index", "resolve", "--manifest", m, "--out", tmp_path / "o")
    assert code == 3, err


def test_scaling_flags_override_meta(tmp_path, capsys):
    m = subset(tmp_path, "emergent-curve", "smooth-curve")
    code, _, _ = run(capsys, "scaling", "--manifest", m, "--out", tmp_path / "o", "--quiet")
    assert code == 0
    rows = {r["dataset"]: r for r in read_csv(tmp_path / "o" / "emergence.csv")}
    assert rows["emergent-curve"]["verdict"] == "emergent"
    assert float(rows["emergent-curve"]["threshold_scale"]) == 1e11
    assert rows["smooth-curve"]["verdict"] != "emergent"
    code, _, _ = run(capsys, "scaling", "--manifest", m, "--out", tmp_path / "p", "--quiet",
                     "--near-random-tol", "0.1", "--jump-min", "0.2")
    rows = {r["dataset"]: r for r in read_csv(tmp_path / "p" / "emergence.csv")}
    assert rows["smooth-curve"]["near_random_tol"] == "0.1"


def test_efficiency_report_units(tmp_path, capsys):
    m = subset(tmp_path, "small-run", "api-latency")
    code, _, _ = run(capsys, "efficiency", "--manifest", m, "--out", tmp_path / "o", "--quiet")
    assert code == 0
    row = read_csv(tmp_path / "o" / "efficiency_training.csv")[0]
    energy = [v for k, v in row.items() if k.startswith("energy")]
    assert float(energy[0]) == pytest.approx(352.0)


@pytest.mark.parametrize("argv", [
    ["homogenize"],
    ["frobnicate", "--manifest", "m", "--out", "o"],
    ["metrics", "--manifest", "MISSING", "--out", "OUT"],
    ["metrics", "--manifest", "MANIFEST", "--out", "OUT", "--format", "xml"],
    ["metrics", "--manifest", "MANIFEST", "--out", "OUT", "--coverage", "0"],
    ["metrics", "--manifest", "MANIFEST", "--out", "OUT", "--threads", "0"],
])
def test_configuration_errors_exit_2(tmp_path, capsys, argv):
    argv = [a.replace("MISSING", str(tmp_path / "none.json")).replace("MANIFEST", str(MANIFEST))
             .replace("OUT", str(tmp_path / "o")) for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"] == "config"


def test_data_error_exit_3_is_located(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"instance_id": "a", "gold": 1, "predicted": 1, "confidence": 1.5}\n')
    m = subset(tmp_path, extra=[{"name": "bad", "kind": "prediction_log", "path": str(bad), "format": "jsonl"}])
    code, _, err = run(capsys, "metrics", "--manifest", m, "--out", tmp_path / "o")
    payload = json.loads(err)
    assert code == 3
    assert (payload["line"], payload["field"]) == (1, "confidence")
    assert payload["file"].endswith("bad.jsonl")


def test_cross_validation_failure_exits_3(tmp_path, capsys):
    m = subset(tmp_path, "fmti-2024-atlas")
    code, _, err = run(capsys, "report", "--manifest", m, "--out", tmp_path / "o")
    assert code == 3 and "fmti" in json.loads(err)["message"]


def test_full_report_is_thread_count_invariant(tmp_path, capsys):
    outs = {}
    for n in (1, 8):
        d = tmp_path / f"t{n}"
        code, stdout, _ = run(capsys, "report", "--manifest", MANIFEST, "--out", d, "--threads", n,
                              "--resolutions", FIXTURES / "index" / "resolutions.json")
        assert code == 0
        outs[n] = ({p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.is_file()}, stdout)
    assert outs[1] == outs[8]
    assert "cross_validation.csv" in outs[1][0]


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "fmeco" in capsys.readouterr().out

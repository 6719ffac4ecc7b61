import json

import pytest

from scenkit.cli import main
from scenkit.logical import deserialize_logical

from conftest import DATA

VOCAB = str(DATA / "vocabulary.json")
CATALOG = str(DATA / "catalog.json")
SCENARIO = str(DATA / "fig_car_follows_truck.scn")
EXPECTED = str(DATA / "expected.json")

EXPORT_ARGS = ["--expected", EXPECTED, "--work-product", "req-keep-distance-001",
               "--duration", "2", "--dt", "1"]


def test_validate_ok(capsys):
    assert main(["validate", "--vocab", VOCAB, SCENARIO]) == 0
    assert "OK" in capsys.readouterr().out


def test_validate_findings(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("scenario s9\nroad r1 is two-lane-motorway\n")
    assert main(["validate", "--vocab", VOCAB, str(bad)]) == 1
    assert "MISSING_REQUIRED_ATTRIBUTE" in capsys.readouterr().out


def test_validate_json_report(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("scenario s9\nroad r1 is two-lane-motorway\n")
    assert main(["validate", "--vocab", VOCAB, "--json", str(bad)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["findings"][0]["code"] == "MISSING_REQUIRED_ATTRIBUTE"


def test_syntax_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("scenario s9\ncar c1\nc1 folows t1\n")
    assert main(["validate", "--vocab", VOCAB, str(bad)]) == 3
    assert "folows" in capsys.readouterr().err


def test_missing_file_exit_code(capsys):
    assert main(["validate", "--vocab", VOCAB, "/nonexistent/file.scn"]) == 2


def test_lower_writes_logical(tmp_path, capsys):
    assert main(["lower", "--vocab", VOCAB, "--catalog", CATALOG,
                 "--out", str(tmp_path), SCENARIO]) == 0
    logical = deserialize_logical((tmp_path / "s1.logical.json").read_text())
    assert len(logical.parameters) == 7


def test_concretize_methods(tmp_path, capsys):
    assert main(["lower", "--vocab", VOCAB, "--catalog", CATALOG,
                 "--out", str(tmp_path), SCENARIO]) == 0
    logical_path = str(tmp_path / "s1.logical.json")
    for method in ("boundary", "equivalence", "pairwise", "random"):
        out = tmp_path / method
        assert main(["concretize", "--out", str(out), "--method", method,
                     "--seed", "7", logical_path]) == 0
        suite = json.loads((out / "s1.suite.json").read_text())
        assert suite["scenarios"], method
        assert all(s["method"] == method for s in suite["scenarios"])


def test_export_from_suite(tmp_path, capsys):
    assert main(["lower", "--vocab", VOCAB, "--catalog", CATALOG,
                 "--out", str(tmp_path), SCENARIO]) == 0
    logical_path = str(tmp_path / "s1.logical.json")
    assert main(["concretize", "--out", str(tmp_path), "--method", "boundary",
                 logical_path]) == 0
    out = tmp_path / "cases"
    assert main(["export", "--logical", logical_path, "--out", str(out),
                 str(tmp_path / "s1.suite.json")] + EXPORT_ARGS) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["case_count"] > 0


def test_pipeline_end_to_end(tmp_path, capsys):
    assert main(["pipeline", "--vocab", VOCAB, "--catalog", CATALOG,
                 "--out", str(tmp_path / "run"), "--method", "pairwise", "--seed", "42",
                 SCENARIO] + EXPORT_ARGS) == 0
    assert (tmp_path / "run" / "logical" / "s1.logical.json").exists()
    assert (tmp_path / "run" / "concrete" / "s1.suite.json").exists()
    manifest = json.loads(
        (tmp_path / "run" / "cases" / "s1" / "manifest.json").read_text())
    assert manifest["case_count"] > 0


def test_pipeline_infeasible_exit_code(tmp_path, capsys):
    doc = json.loads((DATA / "catalog.json").read_text())
    doc["entities"]["truck"][0]["range"] = [0.0, 10.0]
    doc["entities"]["car"][0]["range"] = [50.0, 60.0]
    catalog = tmp_path / "catalog.json"
    catalog.write_text(json.dumps(doc))
    assert main(["pipeline", "--vocab", VOCAB, "--catalog", str(catalog),
                 "--out", str(tmp_path / "run"), SCENARIO] + EXPORT_ARGS) == 4
    assert "INTERVAL_INFEASIBLE" in capsys.readouterr().out


def test_random_suites_differ_by_seed(tmp_path, capsys):
    assert main(["lower", "--vocab", VOCAB, "--catalog", CATALOG,
                 "--out", str(tmp_path), SCENARIO]) == 0
    logical_path = str(tmp_path / "s1.logical.json")
    texts = []
    for seed in ("1", "2"):
        out = tmp_path / f"seed{seed}"
        assert main(["concretize", "--out", str(out), "--method", "random",
                     "--n", "5", "--seed", seed, logical_path]) == 0
        texts.append((out / "s1.suite.json").read_text())
    assert texts[0] != texts[1]

import json

import pytest

from pvapprox.cli import STATS_COLUMNS, main


def _run(args, tmp_path, name="out"):
    out = tmp_path / name
    rc = main(args + ["--out", str(out)])
    return rc, out


def test_estimate_writes_provenance_and_columns(tmp_path):
    rc, out = _run(["estimate", "--dim", "2", "--body", "box:0,1;0,1", "--lambda", "200", "--replicates", "20", "--seed", "42"], tmp_path)
    assert rc == 0
    lines = (out / "estimate.csv").read_text().splitlines()
    assert lines[0].startswith("# pvapprox")
    for field in ("dimension=2", "lambdas=[200.0]", "replicates=20", "seed=42", "k=3", "mc_samples=100000"):
        assert field in lines[0]
    assert lines[1].split(",") == STATS_COLUMNS
    assert len(lines) == 4
    assert (out / "theory.csv").exists()


def test_estimate_is_byte_identical(tmp_path):
    args = ["estimate", "--dim", "1", "--body", "box:0,1", "--lambda", "100,200", "--replicates", "30", "--seed", "5"]
    _, a = _run(args, tmp_path, "a")
    _, b = _run(args, tmp_path, "b")
    assert (a / "estimate.csv").read_bytes() == (b / "estimate.csv").read_bytes()


def test_estimate_mc_in_three_dimensions(tmp_path):
    rc, out = _run(["estimate", "--dim", "3", "--body", "ball:1", "--lambda", "50", "--replicates", "3", "--mc", "2000"], tmp_path)
    assert rc == 0
    assert "vol_symdiff" in (out / "estimate.csv").read_text()


def test_scan_outputs(tmp_path):
    rc, out = _run(["scan", "--dim", "2", "--body", "ball:1", "--lambda", "50,100,200,400", "--replicates", "60", "--seed", "3"], tmp_path)
    assert rc in (0, 2)
    assert len((out / "scan.csv").read_text().splitlines()) == 2 + 8
    fit = (out / "fit.csv").read_text().splitlines()
    assert fit[1].startswith("functional,slope")
    svg = (out / "scan.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg and "reference slope -1.500" in svg


def test_scan_needs_two_intensities(tmp_path):
    rc, _ = _run(["scan", "--lambda", "100", "--replicates", "5"], tmp_path)
    assert rc == 1


def test_verify_quick_empty_lambda_is_usage_error(tmp_path, capsys):
    rc, _ = _run(["verify", "--quick", "--lambda", ""], tmp_path)
    assert rc == 1
    assert "empty" in capsys.readouterr().err


def test_verify_single_deterministic_check(tmp_path):
    rc, out = _run(["verify", "--only", "10"], tmp_path)
    assert rc == 0
    rows = (out / "verify.csv").read_text().splitlines()
    assert rows[2].startswith("10,deterministic suite,True")


def test_verify_reports_statistical_failure(tmp_path):
    rc, _ = _run(["verify", "--quick", "--only", "3"], tmp_path)
    assert rc == 2


def test_oracle_and_jeulin_and_dump(tmp_path):
    rc, out = _run(["oracle", "--body", "ball:1", "--lambda", "10", "--replicates", "3000", "--point", "1.2,0", "--point", "0.5,0.5"], tmp_path)
    assert rc == 0
    assert len((out / "oracle.csv").read_text().splitlines()) == 4
    rc, out = _run(["jeulin", "--lambda", "50", "--replicates", "30", "--groups", "2"], tmp_path, "j")
    assert rc == 0
    assert "ratio" in (out / "jeulin.csv").read_text()
    rc, out = _run(["dump", "--lambda", "100", "--seed", "9"], tmp_path, "d")
    assert rc == 0
    pts = (out / "points.csv").read_text().splitlines()
    assert pts[1] == "x1,x2"
    assert (out / "cells.csv").exists()


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambdas": [100], "replicates": 10, "seed": 7, "dimension": 1, "body": "box:0,1"}))
    rc, out = _run(["estimate", "--config", str(cfg), "--seed", "8"], tmp_path)
    assert rc == 0
    head = (out / "estimate.csv").read_text().splitlines()[0]
    assert "seed=8" in head and "replicates=10" in head and "dimension=1" in head


@pytest.mark.parametrize("args", [
    ["estimate", "--body", "cone:1"],
    ["estimate", "--dim", "4"],
    ["estimate", "--replicates", "1"],
    ["estimate", "--dim", "3", "--body", "ball:1", "--method", "exact"],
    ["estimate", "--lambda", "abc"],
    ["bogus"],
])
def test_usage_errors(args, tmp_path):
    with pytest.raises(SystemExit) as exc:
        rc = main(args + ["--out", str(tmp_path)])
        raise SystemExit(rc)
    assert exc.value.code == 1


def test_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert main(["estimate", "--config", str(bad)]) == 1
    assert main(["estimate", "--config", str(tmp_path / "missing.json")]) == 1

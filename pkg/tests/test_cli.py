from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from bbroute.cli import EXIT_OK, EXIT_PIPELINE, EXIT_VALIDATION, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_code_distance(capsys):
    code, out, _ = run(capsys, "code", "--distance")
    assert code == EXIT_OK
    info = json.loads(out)
    assert (info["n"], info["k"], info["d"]) == (18, 4, 4)


def test_code_from_config(capsys, tmp_path):
    cfg = tmp_path / "code.json"
    cfg.write_text(json.dumps({"l": 6, "m": 6, "a_poly": "x3 + y + y2", "b_poly": "y3 + x + x2"}))
    code, out, _ = run(capsys, "code", "--config", str(cfg))
    assert code == EXIT_OK and json.loads(out)["k"] == 12
    cfg.write_text(json.dumps({"l": 6}))
    assert run(capsys, "code", "--config", str(cfg))[0] == EXIT_VALIDATION


def test_layout(capsys):
    code, out, _ = run(capsys, "layout", "--code", "72-12-6")
    assert code == EXIT_OK
    assert json.loads(out)["max_distance"] == 2


def test_route_writes_artifacts(capsys, tmp_path):
    code, _, _ = run(capsys, "route", "--code", "18-4-4", "--out", str(tmp_path))
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "routes.json").read_text())
    assert [p["rounds"] for p in doc] == [1] * 7
    assert all((tmp_path / f"occupancy_pass{i}.csv").exists() for i in range(1, 8))
    code, out, _ = run(capsys, "route", "--code", "72-12-6", "--lattice")
    assert code == EXIT_OK and max(p["rounds"] for p in json.loads(out)) > 1


def test_emit(capsys, tmp_path):
    code, _, _ = run(capsys, "emit", "--out", str(tmp_path), "--seed", "3", "--no-detect")
    assert code == EXIT_OK
    text = (tmp_path / "circuit.stim").read_text()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["cycles"] == 4 and manifest["seed"] == 3 and not manifest["detect"]
    assert "HERALDED_ERASE" not in text
    assert run(capsys, "emit", "--cycles", "0")[0] == EXIT_VALIDATION


def test_noise(capsys):
    code, out, _ = run(capsys, "noise", "--r-max", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 6
    code, out, _ = run(capsys, "noise", "--impl", "cvdv", "--r-max", "2")
    assert code == EXIT_OK and "cvdv" in out.splitlines()[0]
    assert run(capsys, "noise", "--r-max", "-1")[0] == EXIT_VALIDATION


def test_landscape(capsys, tmp_path):
    code, out, _ = run(capsys, "landscape", "--grid", "3", "--points", "10", "--out", str(tmp_path))
    assert code == EXIT_OK
    grid = list(csv.DictReader(io.StringIO((tmp_path / "landscape.csv").read_text())))
    path = list(csv.DictReader(io.StringIO((tmp_path / "descent_path.csv").read_text())))
    assert len(grid) == 9 and len(path) == 10
    values = [float(r["p2q"]) for r in path]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert run(capsys, "landscape", "--grid", "3", "--t-swap-range", "-1", "0.2")[0] == EXIT_PIPELINE


def test_census(capsys):
    code, out, _ = run(capsys, "census", "--codes", "18-4-4", "72-12-6", "144-12-12")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert [r["toric"] for r in doc["codes"]] == [12, 24, 36]
    assert "scaling" in doc
    assert run(capsys, "census", "--codes", "nope")[0] == EXIT_VALIDATION


def test_report(capsys):
    code, out, _ = run(capsys, "report", "--code", "18-4-4", "--impl", "iswap-cz")
    assert code == EXIT_OK
    assert json.loads(out)["cycle_duration"]["impl"] == "iswap-cz"


@pytest.mark.parametrize("argv", [["report", "--code", "nope"], ["layout", "--code", "nope"]])
def test_unknown_code_is_validation_error(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_VALIDATION and "nope" in err


def test_bad_params_file(capsys, tmp_path):
    bad = tmp_path / "p.json"
    bad.write_text(json.dumps({"T1_cav": -5}))
    assert run(capsys, "noise", "--params", str(bad))[0] == EXIT_VALIDATION
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "noise", "--params", str(bad))[0] == EXIT_VALIDATION
    good = tmp_path / "q.json"
    good.write_text(json.dumps({"T1_cav": 1000.0}))
    assert run(capsys, "noise", "--params", str(good), "--r-max", "1")[0] == EXIT_OK


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bbroute.cli", "code"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 18

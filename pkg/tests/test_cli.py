import csv
import io
import json
import math
import subprocess
import sys

import pytest

from nhentangle.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_scenario_fig2a_csv(capsys):
    code, out, _ = run(["scenario", "fig2a", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    header = rows[0]
    contract = ["Jt", "tau", "S1", "S2", "S3", "fidelity_ghz", "fidelity_local_phases", "survival"]
    assert [c for c in header if c in contract] == contract
    body = rows[1:]
    assert len(body) == 3003
    omega = header.index("omega")
    for value in ("10", "50", "100"):
        assert sum(r[omega] == value for r in body) == 1001


def test_simulate_negative_gamma(capsys):
    code, _, err = run(["simulate", "--qubits", "3", "--gamma", "-1", "--omega", "10"], capsys)
    assert code == 2
    assert "gamma ≥ 0" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["simulate", "--bogus"], [],
                                  ["simulate", "--format", "xml"]])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert "usage" in err


def test_simulate_json(capsys, tmp_path):
    out = tmp_path / "run.json"
    code, _, _ = run(["simulate", "--omega", "1", "--gamma", "0.5", "--steps", "11", "--tmax", "1",
                      "--format", "json", "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 11
    assert doc["metadata"]["config"]["gamma"] == [0.5, 0.5, 0.5]
    surv = [r["survival"] for r in doc["rows"]]
    assert surv[0] == 1.0 and all(a >= b for a, b in zip(surv, surv[1:]))


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_qubits": 4, "omega": 3.0, "steps": 5, "tmax": 1.0}))
    code, out, _ = run(["simulate", "--config", str(cfg), "--steps", "7"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 7
    assert "S4" in rows[0] and "tau" not in rows[0]


def test_missing_config_is_io_error(capsys, tmp_path):
    code, _, err = run(["simulate", "--config", str(tmp_path / "absent.json")], capsys)
    assert code == 4
    assert "absent.json" in err


def test_unwritable_output_is_io_error(capsys, tmp_path):
    code, _, err = run(["simulate", "--steps", "2", "--out", str(tmp_path / "no" / "x.csv")], capsys)
    assert code == 4
    assert "x.csv" in err


def test_sweep_range(capsys):
    code, out, _ = run(["sweep", "--param", "gamma", "--range", "0,1,3", "--omega", "2",
                        "--steps", "4", "--tmax", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12
    assert [float(r["gamma"]) for r in rows[::4]] == [0.0, 0.5, 1.0]


def test_sweep_bad_range(capsys):
    code, _, _ = run(["sweep", "--param", "omega", "--range", "0,1"], capsys)
    assert code == 1


def test_spectrum_classifies(capsys):
    code, out, err = run(["spectrum", "--omega", "0.5", "--gamma", "0.1", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["is_pt_symmetric_phase"] is True
    assert len(doc["rows"]) == 8
    assert "PT-symmetric" in err
    shift = sum(r["im"] for r in doc["rows"]) / 8
    assert shift == pytest.approx(-0.1 * 3 / 4, abs=1e-9)


def test_spectrum_broken_phase(capsys):
    code, out, err = run(["spectrum", "--qubits", "1", "--omega", "0.1", "--gamma", "2"], capsys)
    assert code == 0
    assert "PT-broken" in err


def test_check_subset_exit_codes(capsys, monkeypatch):
    import nhentangle.cli as cli
    from nhentangle.scenarios import check_claims as real

    monkeypatch.setattr(cli, "check_claims", lambda: real(["tau-special-values", "ghz-concurrence"]))
    code, out, err = run(["check", "--format", "csv"], capsys)
    assert code == 0
    assert out.startswith("id,passed,measured,expected")
    assert "PASS  tau-special-values" in err

    monkeypatch.setattr(cli, "check_claims", lambda: real(["pt-phase"]))
    code, _, _ = run(["check"], capsys)
    assert code == 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nhentangle", "simulate", "--steps", "3",
                           "--tmax", str(math.pi), "--omega", "100"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 4

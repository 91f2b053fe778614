import csv
import io
import json
import subprocess
import sys

import pytest

from ofwpep import cli
from ofwpep.bounds import theorem1_bound


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out.strip() else None


def test_bound_table_two_rounds(capsys):
    code, rep = run_json(capsys, "bound", "--algo", "hazan-b3-opt", "--T", "2")
    assert code == 0
    assert rep["primal"] == pytest.approx(1.7321, abs=5e-3)
    assert abs(rep["gap"]) <= 1e-6
    assert set(rep) >= {"T", "primal", "dual", "gap", "status"}


def test_bound_ofw_new_below_theorem(capsys):
    code, rep = run_json(capsys, "bound", "--algo", "ofw-new", "--T", "3")
    assert code == 0
    assert rep["primal"] <= theorem1_bound(3) == pytest.approx(4.0)


def test_bound_zero_schedule(capsys):
    code, rep = run_json(capsys, "bound", "--algo", "zero", "--T", "4", "--L", "2", "--D", "0.5")
    assert code == 0
    assert rep["primal"] == pytest.approx(4.0, rel=1e-6)


def test_bound_bad_input(capsys):
    assert run(capsys, "bound", "--algo", "nope", "--T", "3")[0] == 3
    assert run(capsys, "bound", "--T", "3")[0] == 3
    assert run(capsys, "bound", "--algo", "ofw-new")[0] == 3
    assert run(capsys, "bound", "--algo", "hazan-b3-opt", "--T", "9")[0] == 3
    assert run(capsys, "bound", "--algo", "ofw-new", "--T", "3", "--L", "-1")[0] == 3
    assert run(capsys, "bound", "--schedule", "/nonexistent.json")[0] == 3


def test_optimize_and_reuse_schedule(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, rep = run_json(capsys, "optimize", "--T", "4", "--out", str(out))
    assert code == 0
    assert rep["value"] == pytest.approx(2.9029, abs=5e-3)
    assert rep["reevaluated"] <= rep["value"] + 5e-3
    assert json.loads(out.read_text())["T"] == 4
    code, rep2 = run_json(capsys, "bound", "--schedule", str(out))
    assert code == 0
    assert rep2["primal"] == pytest.approx(rep["reevaluated"], abs=1e-6)


def test_optimize_variants(capsys):
    _, b0 = run_json(capsys, "optimize", "--T", "3", "--beta0")
    assert b0["value"] >= 2.3421 - 5e-3
    _, r2 = run_json(capsys, "optimize", "--T", "3", "--rounds", "2")
    assert r2["value"] <= 2.3421 + 5e-3
    assert r2["schedule"]["r"] == 2
    assert run(capsys, "optimize", "--T", "1")[0] == 3


def test_verify_proof(capsys):
    code, rep = run_json(capsys, "verify-proof", "--T", "48")
    assert code == 0 and rep["passed"]
    assert rep["assembled_bound"] == pytest.approx(32.0, rel=1e-12)
    code, rep = run_json(capsys, "verify-proof", "--T", "3")
    assert code == 0 and rep["passed"]
    assert rep["params"]["sigma"] == 1.0
    assert rep["discriminant"] == pytest.approx(7 / 18)
    code, out, err = run(capsys, "verify-proof", "--T", "2")
    assert code == 3
    assert "not applicable" in err


def test_verify_proof_range_csv(capsys):
    code, out, _ = run(capsys, "verify-proof", "--T-min", "3", "--T-max", "12", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["T"]) for r in rows] == list(range(3, 13))
    assert all(r["passed"] == "1" for r in rows)


def test_sweep_csv(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, text, err = run(capsys, "sweep", "--algo", "ofw-new", "--T-min", "3", "--T-max", "6",
                          "--out", str(out))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert tuple(rows[0]) == cli.CSV_HEADER
    assert [int(r[0]) for r in rows[1:]] == [3, 4, 5, 6]
    for r in rows[1:]:
        assert 0 < float(r[1]) / theorem1_bound(int(r[0])) <= 1
        assert r[2] == "optimal" and r[4] == "tight-bound:ofw-new"
    assert "slope" in err


def test_sweep_modes(capsys):
    code, text, _ = run(capsys, "sweep", "--mode", "closed-form", "--T-min", "2", "--T-max", "3")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1][2] == "not-applicable"
    assert float(rows[2][1]) == pytest.approx(4.0)
    code, text, _ = run(capsys, "sweep", "--rounds", "2", "--T-min", "3", "--T-max", "3")
    assert code == 0
    assert "joint-opt-rounds:2" in text
    assert run(capsys, "sweep", "--mode", "bogus", "--T", "3")[0] == 3
    assert run(capsys, "sweep", "--mode", "joint-opt", "--T", "100")[0] == 3
    assert run(capsys, "sweep", "--mode", "joint-opt", "--T-min", "5", "--T-max", "4")[0] == 3


def test_sweep_error_rows_are_flushed(capsys):
    # hazan-b3-opt exists only for T <= 6: later rows become error rows, earlier ones survive
    code, text, _ = run(capsys, "sweep", "--algo", "hazan-b3-opt", "--T-min", "5", "--T-max", "7")
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 2
    assert rows[1][2] == "optimal" and rows[2][2] == "optimal"
    assert rows[3][2].startswith("error")


def test_sweep_pool_keeps_order(capsys, monkeypatch):
    monkeypatch.setenv("OFWPEP_THREADS", "2")
    code, text, _ = run(capsys, "sweep", "--algo", "zero", "--T-min", "2", "--T-max", "5")
    rows = list(csv.reader(io.StringIO(text)))
    assert [int(r[0]) for r in rows[1:]] == [2, 3, 4, 5]
    assert [round(float(r[1]), 5) for r in rows[1:]] == [2, 3, 4, 5]


def test_default_grid():
    assert cli.DEFAULT_GRID[:3] == (3, 4, 5)
    assert cli.DEFAULT_GRID[-4:] == (25, 30, 40, 50)


def test_witness_then_replay(capsys, tmp_path):
    path = tmp_path / "w.json"
    code, rep = run_json(capsys, "witness", "--algo", "ofw-new", "--T", "4", "--out", str(path))
    assert code == 0
    assert rep["audit"]["passed"]
    code, rr = run_json(capsys, "replay", str(path))
    assert code == 0 and rr["mode"] == "re-audit"
    assert abs(rr["regret"] - rep["objective"]) <= 1e-4 * (1 + rep["objective"])


def test_replay_single_round(capsys, tmp_path):
    path = tmp_path / "w1.json"
    code, _ = run_json(capsys, "witness", "--algo", "zero", "--T", "1", "--L", "2", "--D", "3",
                       "--out", str(path))
    assert code == 0
    code, rr = run_json(capsys, "replay", str(path))
    assert code == 0
    assert rr["regret"] == pytest.approx(6.0)


def test_replay_other_schedule(capsys, tmp_path):
    path = tmp_path / "w.json"
    run_json(capsys, "witness", "--algo", "ofw-new", "--T", "4", "--out", str(path))
    code, rr = run_json(capsys, "replay", str(path), "--algo", "hazan-alg27")
    assert code == 0 and rr["mode"] == "other-schedule"
    _, b = run_json(capsys, "bound", "--algo", "hazan-alg27", "--T", "4")
    assert rr["regret"] <= b["primal"] + 1e-4


def test_replay_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "replay", str(bad))[0] == 3


def test_loglog_slope():
    assert cli.loglog_slope([1, 2, 4, 8], [3, 3 * 2 ** 0.75, 3 * 4 ** 0.75, 3 * 8 ** 0.75]) == \
        pytest.approx(0.75)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ofwpep.cli", "bound", "--algo", "zero", "--T", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["primal"] == pytest.approx(2.0, rel=1e-6)

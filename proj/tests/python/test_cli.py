"""Process-level tests of the command-line tool: exit codes and file outputs."""

import csv
import json
import os
import subprocess

import pytest

CLI = os.environ.get("TODA_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="TODA_CLI not set")


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True)


def test_verify_default_passes(tmp_path):
    r = run("verify", "--out", str(tmp_path))
    assert r.returncode == 0, r.stdout + r.stderr
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "pass"
    assert report["version"]
    assert report["config"]["seed"] == 1
    names = [c["name"] for c in report["checks"]]
    assert "bt-commutativity" in names
    assert all(c["pass"] for c in report["checks"])
    assert all(c["anchor"] for c in report["checks"])


def test_verify_reports_are_deterministic(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    run("verify", "--out", str(a_dir), "--n", "2")
    run("verify", "--out", str(b_dir), "--n", "2")
    a = (a_dir / "report.json").read_text().replace(str(a_dir), "OUT")
    b = (b_dir / "report.json").read_text().replace(str(b_dir), "OUT")
    assert a == b


def test_verify_broken_tolerance_exits_1(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"tolerances": {"bt-commutativity": 1e-300}}))
    r = run("verify", "--config", str(config), "--out", str(tmp_path))
    assert r.returncode == 1
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "fail"


def test_zero_lambda_is_a_config_error(tmp_path):
    r = run("verify", "--lambda", "0", "--out", str(tmp_path))
    assert r.returncode == 2


def test_unknown_config_key_is_a_config_error(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"lambdas": [0.3]}))
    r = run("verify", "--config", str(config), "--out", str(tmp_path))
    assert r.returncode == 2


def test_simulate_continuous(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "n": 1,
        "state": {"x": [0.0], "p": [0.7]},
        "path": [[0, 0], [1, 0]],
        "samples": 10,
    }))
    r = run("simulate", "--mode", "continuous", "--config", str(config),
            "--out", str(tmp_path))
    assert r.returncode == 0
    with open(tmp_path / "trajectory.csv") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t1", "t2", "x1", "p1", "H1", "H2"]
    assert len(rows) == 11
    # free particle: x is linear in t1
    for row in rows[1:]:
        assert float(row[2]) == pytest.approx(0.7 * float(row[0]), abs=1e-10)
        assert float(row[3]) == pytest.approx(0.7)


def test_simulate_backlund_spectrality_constant(tmp_path):
    r = run("simulate", "--mode", "backlund", "--n", "4", "--iterations", "50",
            "--out", str(tmp_path))
    assert r.returncode == 0
    with open(tmp_path / "backlund.csv") as f:
        rows = list(csv.reader(f))
    col = rows[0].index("spectrality")
    values = [float(row[col]) for row in rows[1:]]
    assert len(values) == 51
    assert max(values) - min(values) <= 1e-10


def test_sweep_grid_and_branch_containment(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "n": 2,
        "state": {"x": [0.0, 0.0], "p": [-0.4, 0.1]},
        "lambda": [5.0, 0.3],
        "mu": [0.5],
    }))
    r = run("sweep", "--config", str(config), "--out", str(tmp_path))
    assert r.returncode == 0
    with open(tmp_path / "sweep.csv") as f:
        rows = list(csv.reader(f))
    statuses = {row[2]: row[4] for row in rows[1:]}
    assert statuses["5"] == "branch-invalid"
    assert statuses["0.29999999999999999"] == "ok"


def test_simulate_runtime_failure_flushes_and_exits_1(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "n": 2,
        "state": {"x": [0.0, 0.0], "p": [-0.4, 0.1]},
        "lambda": [5.0],
        "iterations": 10,
    }))
    r = run("simulate", "--mode", "backlund", "--config", str(config),
            "--out", str(tmp_path))
    assert r.returncode == 1
    assert "iteration 0" in r.stderr
    assert (tmp_path / "backlund.csv").read_text().startswith("iter,")


def test_empty_path_is_a_config_error(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"path": []}))
    r = run("simulate", "--config", str(config), "--out", str(tmp_path))
    assert r.returncode == 2


def test_help_exits_0():
    assert run("--help").returncode == 0


def test_missing_subcommand_is_an_error():
    assert run().returncode == 2

from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from acdlab import __version__
from acdlab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_SIMULATION, main, parse_args, render, run


def strip_time(report):
    return {k: v for k, v in report.items() if k != "wall_time"}


def test_zero_steps_is_config_error(capsys):
    assert main(["simulate", "--seed", "1", "--steps", "0"]) == EXIT_CONFIG
    assert "steps" in capsys.readouterr().err


def test_missing_seed_is_config_error():
    status, report = run(["simulate"])
    assert status == EXIT_CONFIG and "error" in report


@pytest.mark.parametrize("argv", [
    ["simulate", "--seed", "1", "--paths", "0"],
    ["simulate", "--seed", "-4"],
    ["ac-check", "--seed", "1", "--process", "nope"],
    ["fdd-test", "--seed", "1", "--times", "0.5,0.33", "--steps", "10"],
    ["example", "planted", "--seed", "1"],
])
def test_invalid_configs(argv):
    assert run(argv)[0] == EXIT_CONFIG


def test_report_fields_and_exit_status():
    status, report = run(["simulate", "--seed", "3", "--paths", "300", "--steps", "50"])
    assert set(report) >= {"schema_version", "command", "config", "statistics", "wall_time", "version", "passed"}
    assert report["version"] == __version__ and report["command"] == "simulate"
    assert report["config"]["seed"] == 3 and "workers" not in report["config"]
    flags = [s["pass"] for s in report["statistics"]]
    assert status == (EXIT_OK if all(flags) else EXIT_FAIL)


def test_failing_statistic_gives_exit_one():
    status, report = run(["ineq-check", "--process", "violator", "--paths", "100", "--seed", "1"])
    assert status == EXIT_FAIL and report["passed"] is False


def test_blowup_exit_three_names_path():
    status, report = run(["simulate", "--seed", "1", "--model", "ou", "--kappa=-1e5", "--paths", "5",
                          "--steps", "100"])
    assert status == EXIT_SIMULATION
    assert report["error"]["type"] == "NumericalBlowup" and report["error"]["path_index"] == 0


def test_planted_ac_check_rate():
    status, report = run(["ac-check", "--process", "planted", "--pairs", "10000", "--delta", "0.01", "--seed", "7",
                          "--t-end", "2", "--steps", "20"])
    rate = report["statistics"][0]["value"]
    assert abs(rate - 0.125) < 0.01 and status == EXIT_OK


def test_planted_ac_check_default_horizon_is_config_error():
    # the planted process jumps at t = 1 and needs t-end > 1
    assert run(["ac-check", "--process", "planted", "--pairs", "100", "--seed", "7"])[0] == EXIT_CONFIG


def test_config_file_defaults_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\npaths = 123\nsteps = 40\nt_end = 2.0\nmodel = ou\n")
    args = parse_args(["simulate", "--config", str(cfg), "--seed", "5", "--steps", "80"])
    assert args.paths == 123 and args.t_end == 2.0 and args.steps == 80 and args.model == "ou"


def test_config_file_bad_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("paths 10\n")
    assert run(["simulate", "--config", str(cfg), "--seed", "1"])[0] == EXIT_CONFIG


def test_out_and_dump(tmp_path):
    out, dump = tmp_path / "r.json", tmp_path / "p.csv"
    status, report = run(["simulate", "--seed", "2", "--paths", "3", "--steps", "4", "--out", str(out),
                          "--dump", str(dump)])
    assert json.loads(out.read_text()) == json.loads(render(report))
    rows = list(csv.reader(dump.open()))
    assert rows[0] == ["path_index", "t", "value"]
    assert len(rows) == 1 + 3 * 5
    assert rows[1][:2] == ["0", "0"] and float(rows[-1][1]) == 1.0
    # 17 significant digits round-trip exactly
    from acdlab.core import TimeGrid
    from acdlab.sde import DiffusionSpec, simulate_ensemble

    ens = simulate_ensemble(DiffusionSpec(lambda t, x: 1.0, lambda t, x: 0.0), TimeGrid(1.0, 4), 0.0, 3, 2)
    vals = np.array([float(r[2]) for r in rows[1:]]).reshape(3, 5)
    assert np.array_equal(vals, ens.values)


@pytest.mark.parametrize("argv", [
    ["example", "refl-bm", "--n", "16", "--paths", "2500", "--steps", "200"],
    ["example", "poisson", "--n", "64", "--paths", "1500", "--steps", "200", "--permutations", "19"],
    ["ac-check", "--process", "refl-bm-limit", "--pairs", "2100", "--steps", "200", "--delta", "0.05"],
    ["lip-check", "--process", "ou", "--paths", "3000", "--steps", "100", "--bootstrap", "10"],
    ["markov-probe", "--paths", "3000", "--t-end", "2", "--steps", "100", "--strata", "4"],
])
def test_reports_identical_across_worker_counts(argv):
    base = strip_time(run(argv + ["--seed", "11", "--workers", "1"])[1])
    for w in ("3", "8"):
        assert render(strip_time(run(argv + ["--seed", "11", "--workers", w])[1])) == render(base)


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "acdlab.cli", "support-check", "--seed", "1", "--paths", "500",
                           "--steps", "100", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode in (EXIT_OK, EXIT_FAIL)
    assert json.loads(out.read_text())["command"] == "support-check"
    assert proc.stdout == ""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from mfgspectral.cli import main, run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """
[problem]
d = 1
m0.kind = dirac
m0.locations = 0.0

[hamiltonian]
name = example-quartic

[payoff]
kind = smoothing
delta_g = {delta}

[solver]
K = 6
N_t = 16

[experiment]
eps = 0.5, 0.25, 0.125
data_K = 16
sample_points = 16
dims = 1
truncations = 4
alphas = 0.5
bound_N_t = 8
oracle_N_t = 16, 32
"""


def write(tmp_path, delta):
    p = tmp_path / f"cfg_{delta}.ini"
    p.write_text(SMALL.format(delta=delta))
    return p


def test_solve_zero_payoff(tmp_path):
    assert run("solve", CONFIGS / "degenerate.ini", tmp_path) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["iterations"] == 2 and summary["converged"]
    for name in ("report.txt", "iterations.csv", "m.field", "v1.field", "config.resolved.ini"):
        assert (tmp_path / name).exists()


def test_smallness_failure_exits_two(tmp_path, capsys):
    cfg = write(tmp_path, 50.0)
    assert run("continuous-dependence", cfg, tmp_path / "cd") == 2
    assert "contraction" in capsys.readouterr().err
    assert run("check-smallness", cfg, tmp_path / "cs") == 2


def test_errors_exit_one(tmp_path):
    assert run("frobnicate", write(tmp_path, 0.01), tmp_path) == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nd = 1\n")
    assert run("solve", bad, tmp_path) == 1
    assert run("solve", tmp_path / "missing.ini", tmp_path) == 1


def test_non_convergence_exits_one(tmp_path):
    cfg = tmp_path / "nc.ini"
    cfg.write_text(SMALL.format(delta=50.0))
    assert run("solve", cfg, tmp_path) == 1


def test_verify_bounds_csv(tmp_path):
    cfg = write(tmp_path, "auto")
    assert run("verify-bounds", cfg, tmp_path / "a", seed=5) == 0
    assert run("verify-bounds", cfg, tmp_path / "b", seed=5) == 0
    a = (tmp_path / "a" / "bounds.csv").read_bytes()
    assert a == (tmp_path / "b" / "bounds.csv").read_bytes()
    assert len(a.decode().splitlines()) - 1 >= 6


@pytest.mark.parametrize("command, output", [
    ("check-smallness", "summary.json"),
    ("continuous-dependence", "continuous_dependence.csv"),
    ("weak-star", "weak_star.csv"),
])
def test_experiment_commands(tmp_path, command, output):
    assert run(command, write(tmp_path, "auto"), tmp_path / "o") == 0
    assert (tmp_path / "o" / output).exists()


def test_oracle_compare_command(tmp_path):
    cfg = tmp_path / "smooth.ini"
    cfg.write_text(SMALL.format(delta="auto").replace(
        "m0.kind = dirac\nm0.locations = 0.0", "m0.kind = band_limited_density\nm0.coefficients = 0:1; 1:0.2; -1:0.2"))
    assert run("oracle-compare", cfg, tmp_path / "o") == 0
    lines = (tmp_path / "o" / "oracle_compare.csv").read_text().splitlines()
    assert lines[0] == "N_t,v_gap,m_gap,order" and len(lines) == 3


def test_main_and_threads_flag(tmp_path):
    cfg = write(tmp_path, 0.0)
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "x"), "--threads", "3"]) == 0
    proc = subprocess.run(
        [sys.executable, "-m", "mfgspectral", "solve", "--config", str(cfg), "--out", str(tmp_path / "y")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "x" / "m.field").read_text() == (tmp_path / "y" / "m.field").read_text()

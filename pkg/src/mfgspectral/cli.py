"""Command-line front end.

Every command reads a config file, writes its outputs to ``--out`` and prints
a one-line verdict.  Exit status: 0 success, 2 when a hypothesis or checked
inequality fails, 1 on any error (bad config, non-convergence, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, ExperimentSettings, dumps_config, load_config
from .fieldio import write_field
from .solver import ProblemConfig, picard_solve, smallness_check, SmallnessReport
from .verify import (
    BOUND_COLUMNS,
    WEAK_STAR_COLUMNS,
    BoundMatrix,
    HypothesisFailure,
    bound_suite,
    continuous_dependence_experiment,
    density_protocol,
    observed_order,
    oracle_gap,
    smallest_K_reaching,
    to_csv,
    weak_star_experiment,
    weight_shift_protocol,
)

COMMANDS = ("solve", "check-smallness", "verify-bounds", "continuous-dependence", "weak-star", "oracle-compare")
EXIT_OK, EXIT_ERROR, EXIT_HYPOTHESIS = 0, 1, 2
DATA_DISTANCE_LEVEL = 1.9

log = logging.getLogger("mfgspectral")


class CommandError(RuntimeError):
    pass


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _smallness_dict(rep: SmallnessReport) -> dict:
    return {
        "passed": rep.passed,
        "failed": rep.failed,
        "R0": rep.R0,
        "R1": rep.R1,
        "upsilon": rep.upsilon,
        "upsilon_tilde": rep.upsilon_tilde,
        "c_G": rep.c_G,
        "c_G_lip": rep.c_G_lip,
        "c_G_wide": rep.c_G_wide,
        "contraction_constant": rep.contraction_constant,
        "route": rep.route,
        "payoff_derivation": rep.payoff_derivation,
        "threshold_delta_g": rep.threshold_delta_g,
        "conditions": [
            {"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "passed": c.passed} for c in rep.conditions
        ],
    }


def _smallness_text(rep: SmallnessReport) -> list[str]:
    lines = [f"R0 = {rep.R0!r}", f"R1 = {rep.R1!r}", f"Upsilon = {rep.upsilon!r}", f"Upsilon~ = {rep.upsilon_tilde!r}"]
    lines += [f"payoff constants: {rep.payoff_derivation}"]
    for c in rep.conditions:
        rel = "<" if c.strict else "<="
        lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.lhs!r} {rel} {c.rhs!r}")
    lines.append(f"contraction constant q = {rep.contraction_constant!r}; route: {rep.route}")
    return lines


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)


def _finish(out: Path, summary: dict, report: list[str]) -> None:
    _write(out, "summary.json", json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    _write(out, "report.txt", "\n".join(report) + "\n")


# -- commands ---------------------------------------------------------------------------


def cmd_solve(cfg: ProblemConfig, exp: ExperimentSettings, out: Path, seed: int) -> int:
    sol = picard_solve(cfg)
    rows = ["iteration,update_norm"] + [f"{i + 1},{u!r}" for i, u in enumerate(sol.update_norms)]
    _write(out, "iterations.csv", "\n".join(rows) + "\n")
    for n, comp in enumerate(sol.v):
        write_field(out / f"v{n + 1}.field", comp)
    write_field(out / "m.field", sol.m)
    summary = {
        "command": "solve",
        "converged": sol.converged,
        "diverging": sol.diverging,
        "iterations": sol.iterations,
        "residuals": list(sol.residuals),
        "contraction_ratios": list(sol.contraction_ratios),
        "delta_g": cfg.payoff.delta_g,
        "K": cfg.K,
        "N_t": cfg.N_t,
        "message": sol.message,
        "smallness": _smallness_dict(sol.smallness),
    }
    report = [
        f"solve: K={cfg.K} N_t={cfg.N_t} T={cfg.T!r} alpha={cfg.alpha!r} delta_g={cfg.payoff.delta_g!r}",
        f"converged = {sol.converged} after {sol.iterations} map evaluations",
        f"residuals (v, m) = {sol.residuals[0]!r}, {sol.residuals[1]!r}",
        *_smallness_text(sol.smallness),
    ]
    _finish(out, summary, report)
    if not sol.converged:
        raise CommandError(f"Picard iteration did not converge: {sol.message}")
    return EXIT_OK


def cmd_check_smallness(cfg, exp, out, seed) -> int:
    rep = smallness_check(cfg, find_threshold=True)
    summary = {"command": "check-smallness", "delta_g": cfg.payoff.delta_g, **_smallness_dict(rep)}
    report = [f"check-smallness: delta_g={cfg.payoff.delta_g!r}, threshold={rep.threshold_delta_g!r}"]
    report += _smallness_text(rep)
    _finish(out, summary, report)
    if not rep.passed:
        print(f"smallness fails: {'; '.join(rep.failed)}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_verify_bounds(cfg, exp, out, seed) -> int:
    matrix = BoundMatrix(exp.dims, exp.truncations, exp.alphas, exp.bound_N_t, cfg.T)
    cells = bound_suite(exp.trials, matrix, seed=seed)
    _write(out, "bounds.csv", to_csv(cells, BOUND_COLUMNS))
    failed = [f"{c.cell}(d={c.d},K={c.K},alpha={c.alpha})" for c in cells if not c.passed]
    _finish(
        out,
        {"command": "verify-bounds", "cells": len(cells), "failed": failed, "seed": seed, "trials": exp.trials},
        [f"{c.cell} d={c.d} K={c.K} alpha={c.alpha}: worst {c.worst_ratio!r} vs limit {c.limit!r}" for c in cells],
    )
    if failed:
        print(f"bound violations: {', '.join(failed)}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_continuous_dependence(cfg, exp, out, seed) -> int:
    rows, report, status = [], [], EXIT_OK
    for protocol in exp.protocols:
        if protocol == "weight_shift":
            a, b = weight_shift_protocol(cfg.d, exp.shift_weight)
        else:
            a, b = density_protocol(cfg.d, exp.density_bump)
        rep = continuous_dependence_experiment(cfg, a, b)
        rows.append((protocol, rep))
        report.append(
            f"{protocol}: solution gap {rep.solution_gap!r}, data gap {rep.data_gap!r}, "
            f"ratio {rep.ratio!r} (limit {rep.limit!r}) {'pass' if rep.passed else 'FAIL'}"
        )
        if not rep.passed:
            status = EXIT_HYPOTHESIS
    lines = ["protocol,solution_gap,data_gap,ratio,bound,limit,passed"]
    lines += [f"{p},{r.solution_gap!r},{r.data_gap!r},{r.ratio!r},{r.bound!r},{r.limit!r},{int(r.passed)}" for p, r in rows]
    _write(out, "continuous_dependence.csv", "\n".join(lines) + "\n")
    summary = {
        "command": "continuous-dependence",
        "delta_g": cfg.payoff.delta_g,
        "protocols": {p: {"ratio": r.ratio, "passed": r.passed} for p, r in rows},
    }
    _finish(out, summary, report)
    return status


def cmd_weak_star(cfg, exp, out, seed) -> int:
    rep = weak_star_experiment(
        cfg, exp.eps, exp.test_functions, exp.probe_times or None, exp.data_K, exp.sample_points
    )
    _write(out, "weak_star.csv", to_csv(rep.rows, WEAK_STAR_COLUMNS))
    data = rep.data_series()
    needed = [smallest_K_reaching(e, DATA_DISTANCE_LEVEL, cfg.d) for e in exp.eps]
    summary = {
        "command": "weak-star",
        "eps": list(exp.eps),
        "v_sup_error": rep.v_series(),
        "data_distance": data,
        "data_K": exp.data_K,
        "K_needed_for_data_distance": needed,
    }
    report = [f"n={i + 1} eps={e!r}: data distance {d!r} (K needed for {DATA_DISTANCE_LEVEL}: {k})"
              for i, (e, d, k) in enumerate(zip(exp.eps, data, needed))]
    _finish(out, summary, report)
    return EXIT_OK


def cmd_oracle_compare(cfg, exp, out, seed) -> int:
    comps = [oracle_gap(replace(cfg, N_t=n)) for n in exp.oracle_N_t]
    orders = [None] + [
        observed_order(a.gap, b.gap) if b.gap > 0 else None for a, b in zip(comps, comps[1:])
    ]
    lines = ["N_t,v_gap,m_gap,order"] + [
        f"{c.N_t},{c.v_gap!r},{c.m_gap!r},{'' if o is None else repr(o)}" for c, o in zip(comps, orders)
    ]
    _write(out, "oracle_compare.csv", "\n".join(lines) + "\n")
    _finish(
        out,
        {"command": "oracle-compare", "gaps": [c.gap for c in comps], "orders": orders},
        lines,
    )
    return EXIT_OK


HANDLERS = {
    "solve": cmd_solve,
    "check-smallness": cmd_check_smallness,
    "verify-bounds": cmd_verify_bounds,
    "continuous-dependence": cmd_continuous_dependence,
    "weak-star": cmd_weak_star,
    "oracle-compare": cmd_oracle_compare,
}


def run(command: str, config_path, output_dir, seed: int = 0) -> int:
    """Execute one command; returns the process exit status."""
    if command not in HANDLERS:
        print(f"error: unknown command {command!r}; expected one of {', '.join(COMMANDS)}", file=sys.stderr)
        return EXIT_ERROR
    try:
        cfg, exp = load_config(config_path)
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write(out, "config.resolved.ini", dumps_config(cfg, exp))
        status = HANDLERS[command](cfg, exp, out, seed)
    except HypothesisFailure as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ConfigError, CommandError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{command}: {'ok' if status == EXIT_OK else 'hypothesis failure'} (outputs in {out})")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mfgspectral", description="Spectral mean field games solver and bound checker")
    parser.add_argument("command", help=" | ".join(COMMANDS))
    parser.add_argument("--config", required=True, help="path to the INI config")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    parser.add_argument("--threads", type=int, default=1, help="parallelism hint; results do not depend on it")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return run(args.command, args.config, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())

"""INI-style problem configuration: parsing, validation and serialization.

Sections and keys (anything else is rejected)::

    [problem]      d, T, alpha, m0.kind, m0.locations, m0.weights, m0.coefficients
    [hamiltonian]  name, max_degree, f1, g1, f2, g2, f1.constants, ...
    [payoff]       kind, n, gamma, delta_g
    [solver]       K, N_t, tol, max_iter, contraction_target, upsilon
    [experiment]   see ExperimentSettings

List syntax: points are separated by ``;`` and coordinates by ``,``.
Polynomials are ``exponents:coefficient`` terms separated by ``;`` (for
example ``2,0:1.0; 0,2:1.0`` is |v|^2 in two dimensions); the components of
g2 are separated by ``|``.  Density coefficients use ``mode:value`` with
Python complex literals, e.g. ``0:1; 1:0.3; -1:0.3; 2:0.1j``.
``delta_g = auto`` (or ``auto:0.9``) resolves to the largest passing payoff
scale found by bisection (times the optional fraction).
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .hamiltonian import (
    BUILTIN,
    FUNCTION_NAMES,
    MAX_DEGREE,
    FunctionConstants,
    HamiltonianSpec,
    ScalarPoly,
    VectorPoly,
    builtin,
)
from .measures import MeasureSpec
from .payoff import PayoffSpec
from .solver import ProblemConfig, delta_g_threshold


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSettings:
    eps: tuple = tuple(2.0**-n for n in range(1, 7))
    test_functions: tuple = ("cos1", "sin1", "cos2")
    probe_times: tuple = ()  # empty means T/2
    data_K: int = 64
    sample_points: int = 64
    protocols: tuple = ("weight_shift", "density")
    shift_weight: float = 0.01
    density_bump: float = 1e-3
    trials: int = 100
    dims: tuple = (1, 2)
    truncations: tuple = (4, 8)
    alphas: tuple = (0.25, 0.5, 0.75)
    bound_N_t: int = 32
    oracle_N_t: tuple = (32, 64, 128, 256)


_PROBLEM_KEYS = {"d", "T", "alpha", "m0.kind", "m0.locations", "m0.weights", "m0.coefficients"}
_HAM_KEYS = {"name", "max_degree", *FUNCTION_NAMES, *(f"{n}.constants" for n in FUNCTION_NAMES)}
_PAYOFF_KEYS = {"kind", "n", "gamma", "delta_g"}
_SOLVER_KEYS = {"K", "N_t", "tol", "max_iter", "contraction_target", "upsilon"}
_EXPERIMENT_KEYS = {f.name for f in fields(ExperimentSettings)}
_SECTIONS = {
    "problem": _PROBLEM_KEYS,
    "hamiltonian": _HAM_KEYS,
    "payoff": _PAYOFF_KEYS,
    "solver": _SOLVER_KEYS,
    "experiment": _EXPERIMENT_KEYS,
}


# -- scalar/list parsing -------------------------------------------------------------


def _num(text: str, key: str, kind=float):
    try:
        if kind is int:
            value = int(text)
        else:
            value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return value


def _list(text: str, sep: str = ",") -> list[str]:
    return [part.strip() for part in text.split(sep) if part.strip()]


def _num_list(text: str, key: str, kind=float) -> tuple:
    return tuple(_num(x, key, kind) for x in _list(text))


def _mode(text: str, key: str) -> tuple:
    return tuple(_num(x, key, int) for x in _list(text))


def _parse_poly(text: str, key: str, max_degree: int) -> ScalarPoly:
    terms = {}
    for item in _list(text, ";"):
        if ":" not in item:
            raise ConfigError(f"{key}: term {item!r} must look like 'exponents:coefficient'")
        exps, coef = item.split(":", 1)
        terms[_mode(exps, key)] = _num(coef, key)
    try:
        return ScalarPoly(terms, max_degree)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _fmt_poly(p: ScalarPoly) -> str:
    return "; ".join(f"{','.join(map(str, a))}:{c!r}" for a, c in p.terms.items())


def _parse_table(text: str, key: str) -> dict:
    table = {}
    for item in _list(text, ";"):
        if ":" not in item:
            raise ConfigError(f"{key}: entry {item!r} must look like 'mode:value'")
        mode, value = item.split(":", 1)
        try:
            table[_mode(mode, key)] = complex(value.strip().replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{key}: bad complex value {value!r}") from None
    return table


def _fmt_complex(z: complex) -> str:
    return repr(z.real) if z.imag == 0 else repr(z).strip("()")


# -- sections --------------------------------------------------------------------------


def _section(cp: configparser.ConfigParser, name: str) -> dict:
    return dict(cp[name]) if cp.has_section(name) else {}


def _require(sec: dict, key: str, where: str) -> str:
    if key not in sec:
        raise ConfigError(f"missing required key {where}.{key}")
    return sec[key]


def _measure(sec: dict) -> MeasureSpec:
    kind = _require(sec, "m0.kind", "problem")
    try:
        if kind == "band_limited_density":
            return MeasureSpec.density(_parse_table(_require(sec, "m0.coefficients", "problem"), "m0.coefficients"))
        locs = [_num_list(p, "m0.locations") for p in _list(_require(sec, "m0.locations", "problem"), ";")]
        weights = _num_list(sec.get("m0.weights", ",".join(["1.0"] * len(locs))), "m0.weights")
        return MeasureSpec(kind, tuple(locs), weights)
    except ValueError as exc:
        raise ConfigError(f"problem.m0: {exc}") from None


def _hamiltonian(sec: dict, d: int) -> HamiltonianSpec:
    name = _require(sec, "name", "hamiltonian")
    poly_keys = [k for k in sec if k != "name"]
    if name in BUILTIN:
        if poly_keys:
            raise ConfigError(f"built-in Hamiltonian {name!r} takes no further keys (got {poly_keys})")
        return builtin(name, d)
    max_degree = _num(sec.get("max_degree", str(MAX_DEGREE)), "max_degree", int)
    polys = {}
    for fn in FUNCTION_NAMES:
        text = _require(sec, fn, "hamiltonian")
        if fn == "g2":
            comps = [c for c in text.split("|")]
            polys[fn] = VectorPoly(tuple(_parse_poly(c, fn, max_degree) for c in comps))
        else:
            polys[fn] = _parse_poly(text, fn, max_degree)
    consts = {}
    for fn in FUNCTION_NAMES:
        key = f"{fn}.constants"
        if key in sec:
            vals = _num_list(sec[key], key)
            if len(vals) != 4:
                raise ConfigError(f"{key}: expected 'c, p, c_lip, p_lip'")
            try:
                consts[fn] = FunctionConstants(*vals)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
    try:
        return HamiltonianSpec(name, d, polys["f1"], polys["g1"], polys["f2"], polys["g2"], consts)
    except ValueError as exc:
        raise ConfigError(f"hamiltonian: {exc}") from None


def _experiment(sec: dict) -> ExperimentSettings:
    base = ExperimentSettings()
    out = {}
    for f in fields(ExperimentSettings):
        if f.name not in sec:
            continue
        text, default = sec[f.name], getattr(base, f.name)
        if isinstance(default, tuple):
            if f.name in ("test_functions", "protocols"):
                out[f.name] = tuple(_list(text))
            elif f.name in ("dims", "truncations", "oracle_N_t"):
                out[f.name] = _num_list(text, f.name, int)
            else:
                out[f.name] = _num_list(text, f.name)
        else:
            out[f.name] = _num(text, f.name, type(default))
    exp = ExperimentSettings(**out)
    bad = set(exp.protocols) - {"weight_shift", "density"}
    if bad:
        raise ConfigError(f"experiment.protocols: unknown protocol(s) {sorted(bad)}")
    if exp.trials < 100:
        raise ConfigError("experiment.trials must be at least 100")
    if any(e < 0 for e in exp.eps):
        raise ConfigError("experiment.eps must be nonnegative")
    return exp


def _resolve_delta_g(text: str, cfg: ProblemConfig) -> ProblemConfig:
    if not text.startswith("auto"):
        return cfg
    fraction = 1.0
    if ":" in text:
        fraction = _num(text.split(":", 1)[1], "delta_g")
        if not 0 < fraction <= 1:
            raise ConfigError("payoff.delta_g: the auto fraction must lie in (0, 1]")
    threshold = delta_g_threshold(cfg)
    if not math.isfinite(threshold):
        raise ConfigError("payoff.delta_g = auto: smallness holds for every scale; give a number")
    return cfg.with_delta_g(fraction * threshold)


def _build(cp: configparser.ConfigParser) -> tuple[ProblemConfig, ExperimentSettings]:
    for name in cp.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(cp[name]) - _SECTIONS[name]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {sorted(unknown)}")
    prob, ham, pay, sol = (_section(cp, s) for s in ("problem", "hamiltonian", "payoff", "solver"))
    d = _num(_require(prob, "d", "problem"), "d", int)
    if not 1 <= d <= 3:
        raise ConfigError(f"problem.d must be 1, 2 or 3, got {d}")
    delta_text = _require(pay, "delta_g", "payoff").strip()
    try:
        payoff = PayoffSpec(
            kind=_require(pay, "kind", "payoff"),
            n=_num(pay.get("n", "0"), "n", int),
            gamma=_num(pay.get("gamma", "1.0"), "gamma"),
            delta_g=1.0 if delta_text.startswith("auto") else _num(delta_text, "delta_g"),
        )
        cfg = ProblemConfig(
            d=d,
            m0=_measure(prob),
            hamiltonian=_hamiltonian(ham, d),
            payoff=payoff,
            K=_num(sol.get("K", "16"), "K", int),
            N_t=_num(sol.get("N_t", "128"), "N_t", int),
            T=_num(prob.get("T", "1.0"), "T"),
            alpha=_num(prob.get("alpha", "0.5"), "alpha"),
            tol=_num(sol.get("tol", "1e-10"), "tol"),
            max_iter=_num(sol.get("max_iter", "200"), "max_iter", int),
            contraction_target=_num(sol.get("contraction_target", "0.5"), "contraction_target"),
            upsilon=sol.get("upsilon", "tilde"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _resolve_delta_g(delta_text, cfg), _experiment(_section(cp, "experiment"))


def _reader() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str  # keys are case-sensitive (K, N_t, T)
    return cp


def loads_config(text: str) -> tuple[ProblemConfig, ExperimentSettings]:
    cp = _reader()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from None
    return _build(cp)


def load_config(path) -> tuple[ProblemConfig, ExperimentSettings]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads_config(text)


def parse_config(path) -> ProblemConfig:
    return load_config(path)[0]


# -- serialization ----------------------------------------------------------------------


def _fmt_tuple(values) -> str:
    return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in values)


def dumps_config(cfg: ProblemConfig, experiment: ExperimentSettings | None = None) -> str:
    """Text that parses back to an identical ProblemConfig (and settings)."""
    prob = {"d": str(cfg.d), "T": repr(float(cfg.T)), "alpha": repr(float(cfg.alpha)), "m0.kind": cfg.m0.kind}
    if cfg.m0.kind == "band_limited_density":
        prob["m0.coefficients"] = "; ".join(
            f"{','.join(map(str, k))}:{_fmt_complex(v)}" for k, v in cfg.m0.coeff_table.items()
        )
    else:
        prob["m0.locations"] = "; ".join(_fmt_tuple(p) for p in cfg.m0.locations)
        prob["m0.weights"] = _fmt_tuple(cfg.m0.weights)
    spec = cfg.hamiltonian
    if spec.name in BUILTIN and builtin(spec.name, cfg.d) == spec:
        ham = {"name": spec.name}
    else:
        if spec.name in BUILTIN:
            raise ConfigError(f"a modified Hamiltonian may not reuse the built-in name {spec.name!r}")
        ham = {"name": spec.name, "max_degree": str(spec.f1.max_degree)}
        for fn in ("f1", "g1", "f2"):
            ham[fn] = _fmt_poly(getattr(spec, fn))
        ham["g2"] = " | ".join(_fmt_poly(c) for c in spec.g2.components)
        for fn, c in spec.constants.items():
            ham[f"{fn}.constants"] = _fmt_tuple((float(c.c), float(c.p), float(c.c_lip), float(c.p_lip)))
    pay = {
        "kind": cfg.payoff.kind,
        "n": str(cfg.payoff.n),
        "gamma": repr(float(cfg.payoff.gamma)),
        "delta_g": repr(float(cfg.payoff.delta_g)),
    }
    sol = {
        "K": str(cfg.K),
        "N_t": str(cfg.N_t),
        "tol": repr(float(cfg.tol)),
        "max_iter": str(cfg.max_iter),
        "contraction_target": repr(float(cfg.contraction_target)),
        "upsilon": cfg.upsilon,
    }
    cp = _reader()
    for name, sec in (("problem", prob), ("hamiltonian", ham), ("payoff", pay), ("solver", sol)):
        cp[name] = sec
    if experiment is not None:
        cp["experiment"] = {
            f.name: (
                _fmt_tuple(v) if isinstance(v := getattr(experiment, f.name), tuple) else (repr(v) if isinstance(v, float) else str(v))
            )
            for f in fields(ExperimentSettings)
        }
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()

"""Nonlocal Hamiltonians H_i(v, m) = g_i(v) * int f_i(v) m dx.

f1, g1, f2 are scalar polynomials in the components of v and g2 is a vector
polynomial.  Polynomials are evaluated by repeated alias-free convolution, so
every product is truncated back to the stored modes after each factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .spectral import (
    FieldMismatchError,
    SpaceTimeField,
    VectorField,
    convolve_arrays,
    reflect,
)

MAX_DEGREE = 4
FUNCTION_NAMES = ("f1", "g1", "f2", "g2")


class MissingConstantsError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarPoly:
    """sum_a c_a v_1^{a_1} ... v_d^{a_d}; ``terms`` maps exponent tuples to c_a."""

    terms: Mapping[tuple, float]
    max_degree: int = MAX_DEGREE

    def __post_init__(self) -> None:
        terms = {tuple(int(e) for e in a): float(c) for a, c in dict(self.terms).items()}
        dims = {len(a) for a in terms}
        if len(dims) > 1:
            raise ValueError("all monomials must have the same number of variables")
        for a in terms:
            if any(e < 0 for e in a):
                raise ValueError(f"negative exponent in {a}")
            if sum(a) > self.max_degree:
                raise ValueError(f"monomial {a} exceeds degree {self.max_degree}")
        object.__setattr__(self, "terms", terms)

    @property
    def nvars(self) -> int:
        return len(next(iter(self.terms))) if self.terms else 0

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)


@dataclass(frozen=True)
class VectorPoly:
    components: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.components)


def abs_sq(d: int) -> ScalarPoly:
    """|v|^2."""
    return ScalarPoly({tuple(2 if j == n else 0 for j in range(d)): 1.0 for n in range(d)})


def constant_poly(d: int, value: float = 1.0) -> ScalarPoly:
    return ScalarPoly({(0,) * d: value})


def linear_vector(d: int, scale: float) -> VectorPoly:
    """scale * v."""
    return VectorPoly(
        tuple(ScalarPoly({tuple(1 if j == n else 0 for j in range(d)): scale}) for n in range(d))
    )


@dataclass(frozen=True)
class FunctionConstants:
    """Growth ||h(v)|| <= c ||v||^p and Lipschitz constant c_lip, exponent p_lip."""

    c: float
    p: float
    c_lip: float
    p_lip: float

    def __post_init__(self) -> None:
        if min(self.c, self.p, self.c_lip, self.p_lip) < 0:
            raise ValueError(f"constants must be nonnegative: {self}")


GrowthConstants = dict  # name in FUNCTION_NAMES -> FunctionConstants


@dataclass(frozen=True)
class HamiltonianSpec:
    name: str
    d: int
    f1: ScalarPoly
    g1: ScalarPoly
    f2: ScalarPoly
    g2: VectorPoly
    constants: Mapping[str, FunctionConstants] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.g2.components) != self.d:
            raise ValueError(f"g2 must have {self.d} components")
        for p in (self.f1, self.g1, self.f2, *self.g2.components):
            if p.terms and p.nvars != self.d:
                raise ValueError(f"polynomial in {p.nvars} variables, expected {self.d}")
        object.__setattr__(self, "constants", dict(self.constants))


def example_quartic(d: int) -> HamiltonianSpec:
    """H1 = |v|^2 int |v|^2 m,  H2 = 2v int |v|^2 m."""
    consts = {
        "f1": FunctionConstants(1.0, 2.0, 1.0, 1.0),
        "g1": FunctionConstants(1.0, 2.0, 1.0, 1.0),
        "f2": FunctionConstants(1.0, 2.0, 1.0, 1.0),
        "g2": FunctionConstants(2.0, 1.0, 1.0, 0.0),
    }
    q = abs_sq(d)
    return HamiltonianSpec("example-quartic", d, q, q, q, linear_vector(d, 2.0), consts)


def example_quadratic(d: int) -> HamiltonianSpec:
    """H1 = |v|^2, H2 = 2v (f1 = f2 = 1); needs a unit-mass m to be literal."""
    consts = {
        "f1": FunctionConstants(1.0, 0.0, 0.0, 0.0),
        "g1": FunctionConstants(1.0, 2.0, 1.0, 1.0),
        "f2": FunctionConstants(1.0, 0.0, 0.0, 0.0),
        "g2": FunctionConstants(2.0, 1.0, 1.0, 0.0),
    }
    one = constant_poly(d)
    return HamiltonianSpec("example-quadratic", d, one, abs_sq(d), one, linear_vector(d, 2.0), consts)


BUILTIN = {"example-quartic": example_quartic, "example-quadratic": example_quadratic}


def builtin(name: str, d: int) -> HamiltonianSpec:
    try:
        return BUILTIN[name](d)
    except KeyError:
        raise ValueError(f"unknown Hamiltonian {name!r}; built-ins are {sorted(BUILTIN)}") from None


# -- evaluation ----------------------------------------------------------------


def _monomial(exps: tuple, comps: np.ndarray, d: int) -> np.ndarray | None:
    out = None
    for n, e in enumerate(exps):
        for _ in range(e):
            out = comps[n] if out is None else convolve_arrays(out, comps[n], d)
    return out


def _eval_scalar(poly: ScalarPoly, comps: np.ndarray, d: int) -> np.ndarray:
    K = comps.shape[-1] // 2
    out = np.zeros(comps.shape[1:], dtype=complex)
    for exps, c in poly.terms.items():
        mono = _monomial(exps, comps, d)
        if mono is None:
            out[(Ellipsis,) + (K,) * d] += c
        else:
            out = out + c * mono
    return out


def eval_poly(poly: ScalarPoly | VectorPoly, v: VectorField) -> SpaceTimeField | VectorField:
    """Apply a polynomial map slice by slice to a space-time vector field."""
    if poly.degree > MAX_DEGREE:
        raise ValueError(f"degree {poly.degree} exceeds {MAX_DEGREE}")
    first = v[0]
    if not isinstance(first, SpaceTimeField):
        raise TypeError("eval_poly expects a space-time vector field")
    comps = v.array
    d, T, real = v.d, first.T, v.real
    if isinstance(poly, VectorPoly):
        return VectorField(
            tuple(SpaceTimeField(_eval_scalar(p, comps, d), T, real) for p in poly.components)
        )
    return SpaceTimeField(_eval_scalar(poly, comps, d), T, real)


def pairing_A(f_of_v: SpaceTimeField, m: SpaceTimeField) -> np.ndarray:
    """A(t_j) = sum_k f_k(t_j) m_{-k}(t_j) on every grid time."""
    if not f_of_v.same_grid(m):
        raise FieldMismatchError("pairing needs fields on the same grid")
    d = m.d
    prod = f_of_v.coeffs * reflect(m.coeffs, d)
    return prod.reshape(prod.shape[0], -1).sum(axis=1)


def _scale_by_time(f: SpaceTimeField, a: np.ndarray, real: bool) -> SpaceTimeField:
    return SpaceTimeField(f.coeffs * a.reshape((-1,) + (1,) * f.d), f.T, real)


def eval_H1(spec: HamiltonianSpec, v: VectorField, m: SpaceTimeField) -> SpaceTimeField:
    A = pairing_A(eval_poly(spec.f1, v), m)
    return _scale_by_time(eval_poly(spec.g1, v), A, v.real and m.real)


def eval_H2(spec: HamiltonianSpec, v: VectorField, m: SpaceTimeField) -> VectorField:
    A = pairing_A(eval_poly(spec.f2, v), m)
    g = eval_poly(spec.g2, v)
    return VectorField(tuple(_scale_by_time(c, A, v.real and m.real) for c in g))


# -- constants -------------------------------------------------------------------


def growth_constants(spec: HamiltonianSpec) -> dict:
    missing = [n for n in FUNCTION_NAMES if n not in spec.constants]
    if missing:
        raise MissingConstantsError(f"spec {spec.name!r} does not declare constants for {missing}")
    return {n: spec.constants[n] for n in FUNCTION_NAMES}


def _bracket(cf: FunctionConstants, cg: FunctionConstants, rho1: float, rho2: float) -> float:
    return (
        2 * cf.c * cg.c_lip * rho1 ** (cf.p + cg.p_lip) * rho2
        + 2 * cg.c * cf.c_lip * rho1 ** (cg.p + cf.p_lip) * rho2
        + cf.c * cg.c * rho1 ** (cf.p + cg.p)
    )


def lipschitz_bound(spec: HamiltonianSpec, rho1: float, rho2: float) -> tuple[float, float]:
    """Lipschitz constants of H1 and H2 on the product of balls of radii rho1, rho2."""
    if not (rho1 > 0 and rho2 > 0):
        raise ValueError(f"radii must be positive, got {rho1}, {rho2}")
    c = growth_constants(spec)
    return _bracket(c["f1"], c["g1"], rho1, rho2), _bracket(c["f2"], c["g2"], rho1, rho2)

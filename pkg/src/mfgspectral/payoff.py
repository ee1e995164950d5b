"""Terminal payoffs G(m) and the constants bounding them in B_{1, beta}.

Two payoffs are available, each scaled by ``delta_g``:

* ``smoothing``: the Fourier multiplier 1 / (1 + |k|^{1+d+gamma}).
* ``truncation``: (chi_n m)^2 sin(x_1 + ... + x_d), where chi_n keeps the
  modes with |k|_inf <= n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .spectral import (
    SpectralField,
    VectorField,
    convolve_arrays,
    gradient,
    mode_length,
    wavenumbers,
)

KINDS = ("smoothing", "truncation")


@dataclass(frozen=True)
class PayoffSpec:
    kind: str = "smoothing"
    n: int = 0
    gamma: float = 1.0
    delta_g: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown payoff kind {self.kind!r}; expected one of {KINDS}")
        if self.delta_g < 0:
            raise ValueError(f"delta_g must be >= 0, got {self.delta_g}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.n < 0:
            raise ValueError(f"truncation order must be >= 0, got {self.n}")

    def scaled(self, delta_g: float) -> PayoffSpec:
        return PayoffSpec(self.kind, self.n, self.gamma, delta_g)


@dataclass(frozen=True)
class Affine:
    """r -> slope * r + intercept, non-decreasing on r >= 0."""

    slope: float
    intercept: float

    def __call__(self, r: float) -> float:
        return self.slope * r + self.intercept

    def describe(self) -> str:
        return f"{self.slope!r}*r + {self.intercept!r}"


@dataclass(frozen=True)
class PayoffConstants:
    c_G: float
    c_G_lip: float
    psi1: Affine
    psi2: Affine
    derivation: str
    c_G_wide: float | None = None


def smoothing_symbol(d: int, K: int, gamma: float) -> np.ndarray:
    r = mode_length(d, K)
    return 1.0 / (1.0 + r ** (1 + d + gamma))


def sine_diagonal(d: int, K: int) -> SpectralField:
    """sin(x_1 + ... + x_d) = (e^{ie.x} - e^{-ie.x}) / 2i with e = (1, ..., 1)."""
    one = (1,) * d
    return SpectralField.from_modes({one: -0.5j, tuple(-x for x in one): 0.5j}, d, K, real=True)


def _low_pass(m: SpectralField, n: int) -> np.ndarray:
    k = wavenumbers(m.d, m.K)
    keep = np.max(np.abs(k), axis=0) <= n
    return np.where(keep, m.coeffs, 0.0)


def apply_payoff(spec: PayoffSpec, mT: SpectralField) -> SpectralField:
    d, K = mT.d, mT.K
    if spec.kind == "smoothing":
        return SpectralField(spec.delta_g * smoothing_symbol(d, K, spec.gamma) * mT.coeffs, mT.real)
    low = _low_pass(mT, spec.n)
    sq = convolve_arrays(low, low, d)
    out = convolve_arrays(sq, sine_diagonal(d, K).coeffs, d)
    return SpectralField(spec.delta_g * out, mT.real)


def grad_payoff(spec: PayoffSpec, mT: SpectralField) -> VectorField:
    return gradient(apply_payoff(spec, mT))


def _smoothing_sum(d: int, K: int, gamma: float) -> float:
    r = mode_length(d, K)
    return float(np.sum((1.0 + r) / (1.0 + r ** (1 + d + gamma))))


def _truncation_sum(d: int, K: int, n: int, beta: float) -> float:
    """Bound for ||(chi_n m)^2 sin||_{B_{1,beta}} / ||m||_{PM^beta}^2.

    Uses |m_i| <= e^{-beta|i|} ||m||_{PM^beta} inside the convolution and
    keeps only output modes with |k|_inf <= K.
    """
    box = list(itertools.product(range(-n, n + 1), repeat=d))
    pts = np.array(box, dtype=float).reshape(-1, d)
    decay = np.exp(-beta * np.linalg.norm(pts, axis=1))
    sq = {}
    for a, wa in zip(box, decay):
        for b, wb in zip(box, decay):
            j = tuple(x + y for x, y in zip(a, b))
            sq[j] = sq.get(j, 0.0) + wa * wb
    total = 0.0
    for shift in ((1,) * d, (-1,) * d):
        for j, s in sq.items():
            k = np.array([x + y for x, y in zip(j, shift)], dtype=float)
            if np.max(np.abs(k)) > K:
                continue
            r = float(np.linalg.norm(k))
            total += 0.5 * (1 + r) * np.exp(beta * r) * s
    return total


def payoff_constants(spec: PayoffSpec, d: int, K: int, beta: float = 0.0) -> PayoffConstants:
    """Constants with ||G(m)||_{B_{1,beta}} <= c_G ||m|| psi1(||m||) and the Lipschitz analogue.

    Norms of m are PM^beta; ``beta`` is alpha*T in the solver.  Sums run over
    the stored modes; ``c_G_wide`` repeats the smoothing sum on a box four
    times wider as an indication of the untruncated value.
    """
    if spec.kind == "smoothing":
        s = _smoothing_sum(d, K, spec.gamma)
        wide = spec.delta_g * _smoothing_sum(d, 4 * K, spec.gamma)
        c = spec.delta_g * s
        why = (
            f"linear payoff: c_G = c~_G = delta_g * sum_(|k|_inf<={K}) (1+|k|)/(1+|k|^{1 + d + spec.gamma})"
            f" = {spec.delta_g!r} * {s!r}; psi1 = psi2 = 1"
        )
        return PayoffConstants(c, c, Affine(0.0, 1.0), Affine(0.0, 1.0), why, wide)
    s = _truncation_sum(d, K, spec.n, beta)
    c = spec.delta_g * s
    why = (
        "quadratic payoff: G(m1) - G(m2) = delta_g chi(m1-m2) chi(m1+m2) sin, so "
        f"c_G = c~_G = delta_g * S with S = {s!r} (n={spec.n}, beta={beta!r}); "
        "psi1(r) = psi2(r) = r"
    )
    return PayoffConstants(c, c, Affine(1.0, 0.0), Affine(1.0, 0.0), why)

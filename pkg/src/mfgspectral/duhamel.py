"""Duhamel integrals on the uniform time grid.

Each mode obeys a scalar convolution in time against e^{-|k|^2 (t-s)}.  The
kernel is integrated exactly against the piecewise-linear interpolant of the
integrand, which keeps the stiff high modes stable and gives second-order
accuracy in the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    FieldMismatchError,
    SpaceTimeField,
    SpectralField,
    VectorField,
    convolve_arrays,
    heat_semigroup,
    mode_length_sq,
    wavenumbers,
)

_SERIES_CUTOFF = 0.1
_SERIES_TERMS = 10


def _phi_series(z: np.ndarray, shift: int) -> np.ndarray:
    # sum_n (-z)^n / (n + shift)!
    out = np.zeros_like(z)
    term = np.full_like(z, 1.0 / math.factorial(shift))
    for n in range(_SERIES_TERMS):
        out = out + term
        term = term * (-z) / (n + 1 + shift)
    return out


def phi1(z: np.ndarray) -> np.ndarray:
    """(1 - e^{-z}) / z, with phi1(0) = 1."""
    z = np.asarray(z, dtype=float)
    small = z < _SERIES_CUTOFF
    zs = np.where(small, 1.0, z)
    return np.where(small, _phi_series(z, 1), -np.expm1(-zs) / zs)


def phi2(z: np.ndarray) -> np.ndarray:
    """(z - 1 + e^{-z}) / z^2, with phi2(0) = 1/2."""
    z = np.asarray(z, dtype=float)
    small = z < _SERIES_CUTOFF
    zs = np.where(small, 1.0, z)
    return np.where(small, _phi_series(z, 2), (zs + np.expm1(-zs)) / zs**2)


@dataclass(frozen=True)
class QuadratureScheme:
    """Per-mode step weights for int_0^h e^{-lam (h - tau)} F(tau) dtau.

    With F linear between F(0) = F_a and F(h) = F_b the integral equals
    ``w_far * F_a + w_near * F_b``, where "near" is the endpoint at which the
    kernel equals one.
    """

    decay: np.ndarray
    w_near: np.ndarray
    w_far: np.ndarray

    @classmethod
    def build(cls, d: int, K: int, T: float, N_t: int) -> QuadratureScheme:
        h = T / N_t
        z = mode_length_sq(d, K) * h
        p1, p2 = phi1(z), phi2(z)
        return cls(np.exp(-z), h * p2, h * (p1 - p2))


def _scheme_for(f: SpaceTimeField) -> QuadratureScheme:
    return QuadratureScheme.build(f.d, f.K, f.T, f.N_t)


def forward_integral(F: np.ndarray, scheme: QuadratureScheme) -> np.ndarray:
    """y(t_j) = int_0^{t_j} e^{-|k|^2 (t_j - s)} F(s) ds, F on the grid (axis 0)."""
    y = np.zeros_like(F)
    for j in range(F.shape[0] - 1):
        y[j + 1] = scheme.decay * y[j] + scheme.w_far * F[j] + scheme.w_near * F[j + 1]
    return y


def backward_integral(F: np.ndarray, scheme: QuadratureScheme) -> np.ndarray:
    """y(t_j) = int_{t_j}^T e^{-|k|^2 (s - t_j)} F(s) ds."""
    y = np.zeros_like(F)
    for j in range(F.shape[0] - 2, -1, -1):
        y[j] = scheme.decay * y[j + 1] + scheme.w_near * F[j] + scheme.w_far * F[j + 1]
    return y


def divergence_of_product(mu: SpaceTimeField, h: VectorField) -> np.ndarray:
    """Coefficients of div(mu h): sum_n i k_n (mu * h_n)_k on every slice."""
    if len(h) != mu.d or not all(mu.same_grid(c) for c in h):
        raise FieldMismatchError("I+ inputs must share dimension, truncation and grid")
    k = wavenumbers(mu.d, mu.K)
    out = np.zeros_like(mu.coeffs)
    for n, comp in enumerate(h):
        out += 1j * k[n] * convolve_arrays(mu.coeffs, comp.coeffs, mu.d)
    return out


def I_plus(mu: SpaceTimeField, h: VectorField) -> SpaceTimeField:
    """int_0^t e^{Delta(t-s)} div(mu h)(s) ds."""
    F = divergence_of_product(mu, h)
    y = forward_integral(F, _scheme_for(mu))
    return SpaceTimeField(y, mu.T, mu.real and h.real)


def I_minus(h: SpaceTimeField) -> VectorField:
    """-int_t^T e^{Delta(s-t)} grad h(s) ds, one component per direction."""
    scheme = _scheme_for(h)
    base = backward_integral(h.coeffs, scheme)
    k = wavenumbers(h.d, h.K)
    return VectorField(tuple(SpaceTimeField(-1j * k[n] * base, h.T, h.real) for n in range(h.d)))


def omega(nu: VectorField, mu: SpaceTimeField, m0: SpectralField, spec) -> SpectralField:
    """Terminal distribution e^{Delta T} m0 + I+(mu, H2(nu, mu))(T)."""
    from .hamiltonian import eval_H2

    if m0.coeffs.shape != mu.coeffs.shape[1:]:
        raise FieldMismatchError("m0 and mu must share (d, K)")
    drift = I_plus(mu, eval_H2(spec, nu, mu))
    free = heat_semigroup(m0, mu.T)
    return SpectralField(free.coeffs + drift.coeffs[-1], m0.real and drift.real)

"""Initial distributions: Dirac masses, Dirac sums and band-limited densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    FieldMismatchError,
    SpectralField,
    norm_pm,
    reflect,
    wavenumbers,
)

KINDS = ("dirac", "dirac_sum", "band_limited_density")
TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class MeasureSpec:
    """Description of m0.

    ``locations`` is a list of d-vectors in [0, 2*pi)^d with one positive
    weight each.  For ``band_limited_density`` the measure is given directly by
    ``coeff_table``, a mapping from mode tuples to complex coefficients in the
    measure convention.
    """

    kind: str
    locations: tuple = ()
    weights: tuple = ()
    coeff_table: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}; expected one of {KINDS}")
        locs = tuple(tuple(float(c) for c in np.atleast_1d(p)) for p in self.locations)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", weights)
        table = {
            (k,) if np.isscalar(k) else tuple(int(x) for x in k): complex(v)
            for k, v in dict(self.coeff_table).items()
        }
        object.__setattr__(self, "coeff_table", table)
        if self.kind == "band_limited_density":
            if not table:
                raise ValueError("band_limited_density needs a coefficient table")
            return
        if len(locs) != len(weights) or not locs:
            raise ValueError("need one weight per location and at least one location")
        if self.kind == "dirac" and len(locs) != 1:
            raise ValueError("a single dirac has exactly one location")
        if any(not w > 0 for w in weights):
            raise ValueError(f"weights must be strictly positive, got {weights}")
        if len({len(p) for p in locs}) != 1:
            raise ValueError("all locations must have the same dimension")
        for p in locs:
            if any(not (0.0 <= c < TWO_PI) for c in p):
                raise ValueError(f"location {p} is outside the fundamental domain [0, 2pi)^d")

    @property
    def total_mass(self) -> float:
        if self.kind == "band_limited_density":
            zero = next((v for k, v in self.coeff_table.items() if not any(k)), 0.0)
            return float(abs(zero))
        return float(sum(self.weights))

    @classmethod
    def dirac(cls, x0, weight: float = 1.0) -> MeasureSpec:
        return cls("dirac", (x0,), (weight,))

    @classmethod
    def dirac_sum(cls, locations, weights) -> MeasureSpec:
        return cls("dirac_sum", tuple(locations), tuple(weights))

    @classmethod
    def density(cls, table: dict) -> MeasureSpec:
        return cls("band_limited_density", coeff_table=table)


def realize(spec: MeasureSpec, d: int, K: int) -> SpectralField:
    """Coefficients m_k = sum_i w_i e^{-ik.x_i} (Diracs) or the stored table."""
    if spec.kind == "band_limited_density":
        for k in spec.coeff_table:
            if len(k) != d:
                raise ValueError(f"mode {k} does not have {d} components")
        f = SpectralField.from_modes(
            {k: v for k, v in spec.coeff_table.items() if max(abs(x) for x in k) <= K}, d, K
        )
        real = bool(np.max(np.abs(reflect(f.coeffs, d) - np.conj(f.coeffs)), initial=0.0) < 1e-14)
        return SpectralField(f.coeffs, real)
    k = wavenumbers(d, K)
    c = np.zeros((2 * K + 1,) * d, dtype=complex)
    for x0, w in zip(spec.locations, spec.weights):
        if len(x0) != d:
            raise ValueError(f"location {x0} does not have {d} coordinates")
        c += w * np.exp(-1j * np.tensordot(np.asarray(x0), k, axes=(0, 0)))
    return SpectralField(c, real=True)


def pm0_distance(a: SpectralField, b: SpectralField) -> float:
    if a.coeffs.shape != b.coeffs.shape:
        raise FieldMismatchError("measures must share (d, K)")
    return norm_pm(a - b, 0.0)


def pair_with_test(m: SpectralField, phi: SpectralField) -> complex:
    """<m, phi> = sum_k phi_k m_{-k}; equals int phi dm under our conventions.

    ``phi`` may have a smaller truncation than ``m``.
    """
    if m.d != phi.d or phi.K > m.K:
        raise FieldMismatchError("test function must have the measure's d and at most its K")
    lo = m.K - phi.K
    inner = tuple(slice(lo, lo + 2 * phi.K + 1) for _ in range(m.d))
    return complex(np.sum(phi.coeffs * reflect(m.coeffs, m.d)[inner]))

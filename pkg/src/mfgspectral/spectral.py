"""Truncated Fourier fields on the torus [0, 2*pi]^d.

Coefficients are stored densely for every mode k with |k|_inf <= K, axis
index ``k + K``.  Functions use the series f(x) = sum_k f_k e^{ikx}; measures
use the unnormalized coefficients m_k = int e^{-ikx} dm(x), so a Dirac mass at
x0 has m_k = e^{-ik.x0}.  Under this pairing, function-times-measure products
are plain convolutions and int f dm = sum_k f_k m_{-k} with no volume factor.
Evaluating a measure field with :func:`evaluate` therefore returns
(2*pi)^d times its density.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.signal import fftconvolve

MAX_DIM = 3


class FieldMismatchError(ValueError):
    """Raised when two fields do not share dimension, truncation or grid."""


@lru_cache(maxsize=None)
def wavenumbers(d: int, K: int) -> np.ndarray:
    """Integer mode vectors, shape ``(d, 2K+1, ..., 2K+1)``."""
    axis = np.arange(-K, K + 1)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    k = np.stack(grids).astype(np.int64)
    k.setflags(write=False)
    return k


@lru_cache(maxsize=None)
def mode_length(d: int, K: int) -> np.ndarray:
    """Euclidean length |k| of every stored mode."""
    k = wavenumbers(d, K).astype(float)
    r = np.sqrt(np.sum(k * k, axis=0))
    r.setflags(write=False)
    return r


@lru_cache(maxsize=None)
def mode_length_sq(d: int, K: int) -> np.ndarray:
    k = wavenumbers(d, K)
    r = np.sum(k * k, axis=0).astype(float)
    r.setflags(write=False)
    return r


def _check_dims(d: int, K: int) -> None:
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {d}")
    if K < 1:
        raise ValueError(f"truncation K must be >= 1, got {K}")


def reflect(coeffs: np.ndarray, d: int) -> np.ndarray:
    """Return the array indexed by -k (flip over the last ``d`` axes)."""
    return np.flip(coeffs, axis=tuple(range(-d, 0)))


def symmetry_defect(coeffs: np.ndarray, d: int) -> float:
    """max |c(-k) - conj(c(k))|; zero for the coefficients of a real field."""
    if coeffs.size == 0:
        return 0.0
    return float(np.max(np.abs(reflect(coeffs, d) - np.conj(coeffs))))


@dataclass(frozen=True)
class SpectralField:
    """Coefficients of one scalar field on T^d, modes |k|_inf <= K."""

    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim < 1 or len(set(c.shape)) != 1 or c.shape[0] % 2 == 0:
            raise ValueError(f"coefficient array must be a (2K+1)^d cube, got {c.shape}")
        _check_dims(c.ndim, c.shape[0] // 2)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def d(self) -> int:
        return self.coeffs.ndim

    @property
    def K(self) -> int:
        return self.coeffs.shape[0] // 2

    @classmethod
    def zeros(cls, d: int, K: int, real: bool = True) -> SpectralField:
        _check_dims(d, K)
        return cls(np.zeros((2 * K + 1,) * d, dtype=complex), real=real)

    @classmethod
    def from_modes(cls, modes: dict, d: int, K: int, real: bool = False) -> SpectralField:
        """Build from ``{k: amplitude}``; ``k`` is an int (d=1) or a d-tuple."""
        _check_dims(d, K)
        c = np.zeros((2 * K + 1,) * d, dtype=complex)
        for k, amp in modes.items():
            kk = (k,) if np.isscalar(k) else tuple(k)
            if len(kk) != d:
                raise ValueError(f"mode {k} does not have {d} components")
            if max(abs(int(x)) for x in kk) > K:
                raise ValueError(f"mode {k} exceeds truncation K={K}")
            c[tuple(int(x) + K for x in kk)] += amp
        return cls(c, real=real)

    def coefficient(self, k) -> complex:
        kk = (k,) if np.isscalar(k) else tuple(k)
        return complex(self.coeffs[tuple(int(x) + self.K for x in kk)])

    def _like(self, other: SpectralField) -> None:
        if self.coeffs.shape != other.coeffs.shape:
            raise FieldMismatchError(
                f"(d, K) mismatch: ({self.d}, {self.K}) vs ({other.d}, {other.K})"
            )

    def __add__(self, other: SpectralField) -> SpectralField:
        self._like(other)
        return SpectralField(self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._like(other)
        return SpectralField(self.coeffs - other.coeffs, self.real and other.real)

    def __neg__(self) -> SpectralField:
        return SpectralField(-self.coeffs, self.real)

    def __mul__(self, scalar) -> SpectralField:
        real = self.real and np.isrealobj(scalar)
        return SpectralField(self.coeffs * scalar, real)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpaceTimeField:
    """A SpectralField per time of the uniform grid t_j = j*T/N_t."""

    coeffs: np.ndarray
    T: float
    real: bool = False

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim < 2 or c.shape[0] < 2:
            raise ValueError("need a leading time axis with at least two grid times")
        spatial = c.shape[1:]
        if len(set(spatial)) != 1 or spatial[0] % 2 == 0:
            raise ValueError(f"spatial block must be a (2K+1)^d cube, got {spatial}")
        _check_dims(len(spatial), spatial[0] // 2)
        if not self.T > 0:
            raise ValueError(f"final time must be positive, got {self.T}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "T", float(self.T))

    @property
    def d(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def K(self) -> int:
        return self.coeffs.shape[1] // 2

    @property
    def N_t(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return time_grid(self.T, self.N_t)

    @classmethod
    def zeros(cls, d: int, K: int, N_t: int, T: float, real: bool = True) -> SpaceTimeField:
        _check_dims(d, K)
        return cls(np.zeros((N_t + 1,) + (2 * K + 1,) * d, dtype=complex), T, real)

    @classmethod
    def constant(cls, f: SpectralField, N_t: int, T: float) -> SpaceTimeField:
        c = np.broadcast_to(f.coeffs, (N_t + 1,) + f.coeffs.shape)
        return cls(c.copy(), T, f.real)

    def slice(self, j: int) -> SpectralField:
        return SpectralField(self.coeffs[j], self.real)

    def same_grid(self, other: SpaceTimeField) -> bool:
        return self.coeffs.shape == other.coeffs.shape and self.T == other.T

    def _like(self, other: SpaceTimeField) -> None:
        if not self.same_grid(other):
            raise FieldMismatchError(
                f"grid mismatch: shape {self.coeffs.shape}, T={self.T} vs "
                f"shape {other.coeffs.shape}, T={other.T}"
            )

    def __add__(self, other: SpaceTimeField) -> SpaceTimeField:
        self._like(other)
        return SpaceTimeField(self.coeffs + other.coeffs, self.T, self.real and other.real)

    def __sub__(self, other: SpaceTimeField) -> SpaceTimeField:
        self._like(other)
        return SpaceTimeField(self.coeffs - other.coeffs, self.T, self.real and other.real)

    def __neg__(self) -> SpaceTimeField:
        return SpaceTimeField(-self.coeffs, self.T, self.real)

    def __mul__(self, scalar) -> SpaceTimeField:
        return SpaceTimeField(self.coeffs * scalar, self.T, self.real and np.isrealobj(scalar))

    __rmul__ = __mul__


Scalar = Union[SpectralField, SpaceTimeField]


@dataclass(frozen=True)
class VectorField:
    """d components sharing (d, K) and, for space-time components, the grid."""

    components: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a vector field needs at least one component")
        first = comps[0]
        for c in comps[1:]:
            if type(c) is not type(first) or c.coeffs.shape != first.coeffs.shape:
                raise FieldMismatchError("vector components must share type and shape")
            if isinstance(c, SpaceTimeField) and c.T != first.T:
                raise FieldMismatchError("vector components must share the time grid")
        if len(comps) != first.d:
            raise FieldMismatchError(f"expected {first.d} components, got {len(comps)}")
        object.__setattr__(self, "components", comps)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, n: int) -> Scalar:
        return self.components[n]

    @property
    def d(self) -> int:
        return self.components[0].d

    @property
    def K(self) -> int:
        return self.components[0].K

    @property
    def real(self) -> bool:
        return all(c.real for c in self.components)

    @property
    def array(self) -> np.ndarray:
        return np.stack([c.coeffs for c in self.components])

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(tuple(a + b for a, b in zip(self, other, strict=True)))

    def __sub__(self, other: VectorField) -> VectorField:
        return VectorField(tuple(a - b for a, b in zip(self, other, strict=True)))

    def __mul__(self, scalar) -> VectorField:
        return VectorField(tuple(c * scalar for c in self))

    __rmul__ = __mul__


def time_grid(T: float, N_t: int) -> np.ndarray:
    if N_t < 1:
        raise ValueError(f"N_t must be >= 1, got {N_t}")
    return np.linspace(0.0, T, N_t + 1)


# -- norms -----------------------------------------------------------------


def norm_pm(f: SpectralField, beta: float) -> float:
    """sup_k e^{beta|k|} |f_k| over the stored modes."""
    _nonneg(beta, "beta")
    if f.coeffs.size == 0:
        return 0.0
    w = np.exp(beta * mode_length(f.d, f.K))
    return float(np.max(w * np.abs(f.coeffs)))


def norm_b(f: SpectralField, beta: float) -> float:
    """sum_k e^{beta|k|} |f_k|."""
    _nonneg(beta, "beta")
    w = np.exp(beta * mode_length(f.d, f.K))
    return float(np.sum(w * np.abs(f.coeffs)))


def norm_b1(f: SpectralField, beta: float) -> float:
    """sum_k (1+|k|) e^{beta|k|} |f_k|."""
    _nonneg(beta, "beta")
    r = mode_length(f.d, f.K)
    return float(np.sum((1.0 + r) * np.exp(beta * r) * np.abs(f.coeffs)))


def st_norm_pm_alpha(f: SpaceTimeField, alpha: float) -> float:
    """max over grid times t and modes k of e^{alpha t |k|} |f_k(t)|.

    The time weight grows with t, so this is the natural norm for the
    forward (density) component.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must satisfy α∈[0,1), got {alpha}")
    r = mode_length(f.d, f.K)
    t = f.times.reshape((-1,) + (1,) * f.d)
    return float(np.max(np.exp(alpha * t * r) * np.abs(f.coeffs)))


def st_norm_b(f: SpaceTimeField | VectorField, beta: float) -> float:
    """sum_k sup_t e^{beta|k|}|f_k(t)|; vectors sum their component norms."""
    _nonneg(beta, "beta")
    if isinstance(f, VectorField):
        return float(sum(st_norm_b(c, beta) for c in f))
    w = np.exp(beta * mode_length(f.d, f.K))
    return float(np.sum(w * np.max(np.abs(f.coeffs), axis=0)))


def _nonneg(x: float, name: str) -> None:
    if not x >= 0:
        raise ValueError(f"{name} must be >= 0, got {x}")


# -- products ----------------------------------------------------------------


def convolve_arrays(a: np.ndarray, b: np.ndarray, d: int, method: str = "fft") -> np.ndarray:
    """Alias-free product of coefficient arrays over their last ``d`` axes.

    Computes the full linear convolution (modes up to 2K) and truncates it
    back to |k|_inf <= K.  Leading axes broadcast.
    """
    if a.shape[-d:] != b.shape[-d:]:
        raise FieldMismatchError(f"spatial shape mismatch {a.shape[-d:]} vs {b.shape[-d:]}")
    K = a.shape[-1] // 2
    if method == "fft":
        axes = tuple(range(-d, 0))
        lead = np.broadcast_shapes(a.shape[:-d], b.shape[:-d])
        a = np.broadcast_to(a, lead + a.shape[-d:])
        b = np.broadcast_to(b, lead + b.shape[-d:])
        full = fftconvolve(a, b, mode="full", axes=axes)
        crop = (Ellipsis,) + (slice(K, 3 * K + 1),) * d
        return np.ascontiguousarray(full[crop])
    if method == "direct":
        return _convolve_direct(a, b, d)
    raise ValueError(f"unknown convolution method {method!r}")


def _convolve_direct(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    # out_k = sum_j a_{k-j} b_j, restricted to |k|, |j|, |k-j| <= K
    K = a.shape[-1] // 2
    n = 2 * K + 1
    lead = np.broadcast_shapes(a.shape[:-d], b.shape[:-d])
    out = np.zeros(lead + (n,) * d, dtype=complex)
    for j in itertools.product(range(-K, K + 1), repeat=d):
        bj = b[(Ellipsis,) + tuple(x + K for x in j)][(Ellipsis,) + (None,) * d]
        dst, src = [], []
        for x in j:
            lo, hi = max(-K, x - K), min(K, x + K)
            dst.append(slice(lo + K, hi + K + 1))
            src.append(slice(lo - x + K, hi - x + K + 1))
        out[(Ellipsis,) + tuple(dst)] += a[(Ellipsis,) + tuple(src)] * bj
    return out


def convolve(f: Scalar, g: Scalar, method: str = "fft") -> Scalar:
    """(f*g)_k = sum_j f_{k-j} g_j, the coefficients of the pointwise product."""
    if type(f) is not type(g):
        raise FieldMismatchError("cannot convolve a spatial field with a space-time field")
    if f.coeffs.shape != g.coeffs.shape:
        raise FieldMismatchError(f"shape mismatch {f.coeffs.shape} vs {g.coeffs.shape}")
    out = convolve_arrays(f.coeffs, g.coeffs, f.d, method)
    real = f.real and g.real
    if isinstance(f, SpaceTimeField):
        if f.T != g.T:
            raise FieldMismatchError("time grids differ")
        return SpaceTimeField(out, f.T, real)
    return SpectralField(out, real)


# -- heat semigroup and differentiation --------------------------------------


def heat_multiplier(d: int, K: int, t) -> np.ndarray:
    """e^{-|k|^2 t}; a 1-D array of times gives a leading time axis."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("heat semigroup needs t >= 0")
    lam = mode_length_sq(d, K)
    return np.exp(-lam * t.reshape(t.shape + (1,) * d))


def heat_semigroup(f: SpectralField, t: float) -> SpectralField:
    if t < 0:
        raise ValueError(f"heat semigroup needs t >= 0, got {t}")
    if t == 0:
        return f
    return SpectralField(f.coeffs * heat_multiplier(f.d, f.K, t), f.real)


def heat_flow(f: SpectralField, T: float, N_t: int, reverse: bool = False) -> SpaceTimeField:
    """Slices e^{Delta t_j} f, or e^{Delta (T - t_j)} f when ``reverse``."""
    t = time_grid(T, N_t)
    s = T - t if reverse else t
    s = np.maximum(s, 0.0)
    return SpaceTimeField(heat_multiplier(f.d, f.K, s) * f.coeffs, T, f.real)


def gradient(f: Scalar) -> VectorField:
    """Components i k_n f_k."""
    k = wavenumbers(f.d, f.K)
    comps = []
    for n in range(f.d):
        c = 1j * k[n] * f.coeffs
        comps.append(
            SpaceTimeField(c, f.T, f.real) if isinstance(f, SpaceTimeField) else SpectralField(c, f.real)
        )
    return VectorField(tuple(comps))


# -- physical space ----------------------------------------------------------


def evaluate(f: SpectralField, x: Sequence[float] | float) -> complex:
    """Partial sum sum_k f_k e^{ik.x}; real-valued when the field is real."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (f.d,):
        raise ValueError(f"point must have {f.d} coordinates")
    k = wavenumbers(f.d, f.K)
    phase = np.tensordot(x, k, axes=(0, 0))
    val = complex(np.sum(f.coeffs * np.exp(1j * phase)))
    return val.real if f.real else val


def sample_on_grid(coeffs: np.ndarray, d: int, n_points: int) -> np.ndarray:
    """Values on the uniform grid x_i = 2*pi*i/n_points per axis.

    Works on any array whose last ``d`` axes are modes.
    """
    K = coeffs.shape[-1] // 2
    x = 2 * np.pi * np.arange(n_points) / n_points
    E = np.exp(1j * np.outer(x, np.arange(-K, K + 1)))
    out = coeffs
    for ax in range(d):
        axis = out.ndim - d + ax
        out = np.moveaxis(np.tensordot(out, E, axes=([axis], [1])), -1, axis)
    return out

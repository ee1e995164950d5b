"""Forward-backward sweep solver used to cross-check the Picard solver.

Nothing here goes through the spectral/duhamel/payoff code paths.  Products are
formed pointwise on a physical grid of 3K+1 points per axis (enough for the
truncated product of two band-K fields to come out alias-free), time stepping
is the exponential trapezoidal rule, and the coupling is resolved by
alternating a forward sweep for m with a backward sweep for v.
"""

from __future__ import annotations

import numpy as np

from .hamiltonian import ScalarPoly, VectorPoly
from .measures import realize


class OracleDidNotConverge(RuntimeError):
    pass


class _Torus:
    def __init__(self, d: int, K: int):
        self.d, self.K = d, K
        self.n = 2 * K + 1
        self.M = 3 * K + 1
        ax = np.arange(-K, K + 1)
        k = np.stack(np.meshgrid(*([ax] * d), indexing="ij"))
        self.k = k
        self.ksq = np.sum(k * k, axis=0).astype(float)
        self.index = tuple(np.mod(k[n], self.M) for n in range(d))
        self.axes = tuple(range(-d, 0))

    def to_grid(self, c: np.ndarray) -> np.ndarray:
        lead = c.shape[: c.ndim - self.d]
        buf = np.zeros(lead + (self.M,) * self.d, dtype=complex)
        buf[(Ellipsis,) + self.index] = c
        return np.fft.ifftn(buf, axes=self.axes) * self.M**self.d

    def from_grid(self, u: np.ndarray) -> np.ndarray:
        c = np.fft.fftn(u, axes=self.axes) / self.M**self.d
        return c[(Ellipsis,) + self.index]

    def product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.from_grid(self.to_grid(a) * self.to_grid(b))

    def integral(self, f: np.ndarray, m: np.ndarray) -> np.ndarray:
        """sum_k f_k m_{-k} as a grid average of the pointwise product."""
        u = self.to_grid(f) * self.to_grid(m)
        return u.reshape(u.shape[: u.ndim - self.d] + (-1,)).mean(axis=-1)

    def poly(self, p: ScalarPoly, v: np.ndarray) -> np.ndarray:
        out = np.zeros(v.shape[1:], dtype=complex)
        zero = (Ellipsis,) + (self.K,) * self.d
        for exps, coef in p.terms.items():
            mono = None
            for n, e in enumerate(exps):
                for _ in range(e):
                    mono = v[n] if mono is None else self.product(mono, v[n])
            if mono is None:
                out[zero] += coef
            else:
                out = out + coef * mono
        return out

    def vpoly(self, p: VectorPoly, v: np.ndarray) -> np.ndarray:
        return np.stack([self.poly(c, v) for c in p.components])


def _payoff_gradient(tor: _Torus, payoff, mT: np.ndarray) -> np.ndarray:
    if payoff.kind == "smoothing":
        r = np.sqrt(tor.ksq)
        G = payoff.delta_g * mT / (1.0 + r ** (1 + tor.d + payoff.gamma))
    else:
        low = np.where(np.max(np.abs(tor.k), axis=0) <= payoff.n, mT, 0.0)
        sq = tor.product(low, low)
        grids = np.meshgrid(*([2 * np.pi * np.arange(tor.M) / tor.M] * tor.d), indexing="ij")
        x = np.sin(sum(grids))
        G = payoff.delta_g * tor.from_grid(tor.to_grid(sq) * x)
    return np.stack([1j * tor.k[n] * G for n in range(tor.d)])


def oracle_time_march(cfg, tol: float = 1e-13, max_sweeps: int = 500, inner_tol: float = 1e-15):
    """Solve the mild system by alternating sweeps; returns (v, m) coefficient arrays.

    ``v`` has shape (d, N_t+1, 2K+1, ...) and ``m`` has shape (N_t+1, 2K+1, ...).
    """
    d, K, N, T = cfg.d, cfg.K, cfg.N_t, cfg.T
    tor = _Torus(d, K)
    spec = cfg.hamiltonian
    h = T / N
    E = np.exp(-tor.ksq * h)
    m0 = realize(cfg.m0, d, K).coeffs
    ik = 1j * tor.k

    m = np.stack([np.exp(-tor.ksq * (j * h)) * m0 for j in range(N + 1)])
    v = np.zeros((d, N + 1) + (2 * K + 1,) * d, dtype=complex)

    def density_flux(vj: np.ndarray, mj: np.ndarray) -> np.ndarray:
        A = tor.integral(tor.poly(spec.f2, vj), mj)
        g = tor.vpoly(spec.g2, vj) * A
        return sum(ik[n] * tor.product(mj, g[n]) for n in range(d))

    def value_source(vj: np.ndarray, mj: np.ndarray) -> np.ndarray:
        A = tor.integral(tor.poly(spec.f1, vj), mj)
        return tor.poly(spec.g1, vj) * A

    def forward(v: np.ndarray) -> np.ndarray:
        out = np.empty_like(m)
        out[0] = m0
        F_prev = density_flux(v[:, 0], m0)
        for j in range(N):
            base = E * out[j] + 0.5 * h * E * F_prev
            guess = E * out[j]
            for _ in range(100):
                F_next = density_flux(v[:, j + 1], guess)
                new = base + 0.5 * h * F_next
                done = np.max(np.abs(new - guess)) <= inner_tol * (1 + np.max(np.abs(new)))
                guess = new
                if done:
                    break
            out[j + 1] = guess
            F_prev = density_flux(v[:, j + 1], guess)
        return out

    def backward(m: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        out[:, N] = _payoff_gradient(tor, cfg.payoff, m[N])
        H_next = value_source(out[:, N], m[N])
        for j in range(N - 1, -1, -1):
            base = E * out[:, j + 1] - 0.5 * h * ik * (E * H_next)
            guess = out[:, j + 1].copy()
            for _ in range(100):
                H_here = value_source(guess, m[j])
                new = base - 0.5 * h * ik * H_here
                done = np.max(np.abs(new - guess)) <= inner_tol * (1 + np.max(np.abs(new)))
                guess = new
                if done:
                    break
            out[:, j] = guess
            H_next = value_source(guess, m[j])
        return out

    for sweep in range(max_sweeps):
        new_m = forward(v)
        new_v = backward(new_m)
        change = max(np.max(np.abs(new_m - m)), np.max(np.abs(new_v - v)))
        m, v = new_m, new_v
        if change < tol:
            return v, m
    raise OracleDidNotConverge(f"sweeps did not settle after {max_sweeps} passes (change {change:.3e})")

"""Picard iteration for the mild forward-backward system and its smallness verifier.

The unknowns are v = grad u, a space-time vector field measured in
(B_{alpha T})^d, and the density m, measured in PM^alpha.  One application of
the fixed-point map is

    v <- e^{Delta(T-t)} grad G(Omega(v, m)) + I-(H1(v, m))
    m <- e^{Delta t} m0 + I+(m, H2(v, m))

where Omega(v, m) is the second line evaluated at t = T.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .duhamel import I_minus, I_plus
from .hamiltonian import HamiltonianSpec, eval_H1, eval_H2, growth_constants
from .measures import MeasureSpec, realize
from .payoff import PayoffSpec, grad_payoff, payoff_constants
from .spectral import (
    SpaceTimeField,
    SpectralField,
    VectorField,
    heat_flow,
    heat_semigroup,
    norm_pm,
    st_norm_b,
    st_norm_pm_alpha,
)

log = logging.getLogger(__name__)

UPSILON_CHOICES = ("tilde", "plain")


@dataclass(frozen=True)
class ProblemConfig:
    d: int
    m0: MeasureSpec
    hamiltonian: HamiltonianSpec
    payoff: PayoffSpec
    K: int = 16
    N_t: int = 128
    T: float = 1.0
    alpha: float = 0.5
    tol: float = 1e-10
    max_iter: int = 200
    contraction_target: float = 0.5
    upsilon: str = "tilde"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must satisfy α∈[0,1), got {self.alpha}")
        if not self.T > 0:
            raise ValueError(f"final time T must be positive, got {self.T}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.K < 1 or self.N_t < 1 or self.max_iter < 1:
            raise ValueError("K, N_t and max_iter must be positive integers")
        if not 1 <= self.d <= 3:
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")
        if self.hamiltonian.d != self.d:
            raise ValueError(f"Hamiltonian is for d={self.hamiltonian.d}, problem has d={self.d}")
        if not 0 < self.contraction_target < 1:
            raise ValueError("contraction_target must lie in (0, 1)")
        if self.upsilon not in UPSILON_CHOICES:
            raise ValueError(f"upsilon must be one of {UPSILON_CHOICES}")

    @property
    def beta(self) -> float:
        """Fixed exponential weight alpha*T of the v-space."""
        return self.alpha * self.T

    def with_delta_g(self, delta_g: float) -> ProblemConfig:
        return replace(self, payoff=self.payoff.scaled(delta_g))


def initial_field(cfg: ProblemConfig) -> SpectralField:
    return realize(cfg.m0, cfg.d, cfg.K)


def _terminal_term(cfg: ProblemConfig, mT: SpectralField) -> VectorField:
    grad = grad_payoff(cfg.payoff, mT)
    return VectorField(tuple(heat_flow(g, cfg.T, cfg.N_t, reverse=True) for g in grad))


def ball_center(cfg: ProblemConfig) -> tuple[VectorField, SpaceTimeField]:
    """(e^{Delta(T-t)} grad G(e^{Delta T} m0), e^{Delta t} m0)."""
    m0 = initial_field(cfg)
    return _terminal_term(cfg, heat_semigroup(m0, cfg.T)), heat_flow(m0, cfg.T, cfg.N_t)


def apply_map(nu: VectorField, mu: SpaceTimeField, cfg: ProblemConfig) -> tuple[VectorField, SpaceTimeField]:
    """Both components of the fixed-point map from one shared I+ evaluation."""
    m0 = initial_field(cfg)
    spec = cfg.hamiltonian
    drift = I_plus(mu, eval_H2(spec, nu, mu))
    new_m = heat_flow(m0, cfg.T, cfg.N_t) + drift
    terminal = new_m.slice(cfg.N_t)
    new_v = _terminal_term(cfg, terminal) + I_minus(eval_H1(spec, nu, mu))
    return new_v, new_m


def T1(nu: VectorField, mu: SpaceTimeField, cfg: ProblemConfig) -> VectorField:
    return apply_map(nu, mu, cfg)[0]


def T2(nu: VectorField, mu: SpaceTimeField, cfg: ProblemConfig) -> SpaceTimeField:
    return apply_map(nu, mu, cfg)[1]


def pair_norm(nu: VectorField, mu: SpaceTimeField, cfg: ProblemConfig) -> float:
    return st_norm_b(nu, cfg.beta) + st_norm_pm_alpha(mu, cfg.alpha)


def residual(v: VectorField, m: SpaceTimeField, cfg: ProblemConfig) -> tuple[float, float]:
    new_v, new_m = apply_map(v, m, cfg)
    return st_norm_b(v - new_v, cfg.beta), st_norm_pm_alpha(m - new_m, cfg.alpha)


# -- smallness verifier ----------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    name: str
    lhs: float
    rhs: float
    strict: bool = False

    @property
    def passed(self) -> bool:
        return self.lhs < self.rhs if self.strict else self.lhs <= self.rhs


@dataclass(frozen=True)
class SmallnessReport:
    R0: float
    R1: float
    upsilon: float
    upsilon_tilde: float
    c_G: float
    c_G_lip: float
    conditions: tuple
    contraction_constant: float
    route: str
    payoff_derivation: str
    c_G_wide: float | None = None
    threshold_delta_g: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.passed]


def _route(consts: dict) -> str:
    f1, g1, f2, g2 = (consts[n] for n in ("f1", "g1", "f2", "g2"))
    case_a = (
        f1.p + g1.p > 1
        and f2.p + g2.p > 1
        and f1.p + g1.p_lip > 0
        and f1.p_lip + g1.p > 0
        and f2.p + g2.p_lip > 0
        and f2.p_lip + g2.p > 0
    )
    return "a: small payoff" if case_a else "b: small Hamiltonian constants"


def _evaluate_conditions(cfg: ProblemConfig, R1: float) -> SmallnessReport:
    m0 = initial_field(cfg)
    R0 = norm_pm(m0, 0.0)
    c = growth_constants(cfg.hamiltonian)
    f1, g1, f2, g2 = (c[n] for n in ("f1", "g1", "f2", "g2"))
    pc = payoff_constants(cfg.payoff, cfg.d, cfg.K, beta=cfg.beta)
    cG, cGl, psi1, psi2 = pc.c_G, pc.c_G_lip, pc.psi1, pc.psi2
    a = 1.0 / (1.0 - cfg.alpha)
    P1, P2 = f1.p + g1.p, f2.p + g2.p

    R1_bound = cG * R0 * psi1(R0)
    omega_excess = a * (R0 + R1_bound) ** 2 * f2.c * g2.c * (2 * R1_bound) ** P2
    ups = psi2(2 * R0 + omega_excess)
    ups_t = psi2(2 * R0 + 2 * omega_excess)
    ups_sel = ups_t if cfg.upsilon == "tilde" else ups

    S, r = R0 + R1, 2 * R1
    h2_bracket = (
        f2.c * g2.c * r**P2
        + f2.c * g2.c_lip * r ** (f2.p + g2.p_lip) * S
        + f2.c_lip * g2.c * r ** (f2.p_lip + g2.p) * S
    )
    lip_payoff = cGl * ups_sel * 2 * a * S * h2_bracket
    lip_backward = cfg.d * (
        2 * f1.c * g1.c_lip * r ** (f1.p + g1.p_lip) * S
        + 2 * g1.c * f1.c_lip * r ** (g1.p + f1.p_lip) * S
        + f1.c * g1.c * r**P1
    )
    lip_forward = 2 * a * S * h2_bracket
    q = lip_payoff + lip_backward + lip_forward

    conditions = (
        Condition("self-map: payoff term of T1 <= R1/4", cGl * g2.c * f2.c * ups * a * r**P2 * S**2, R1 / 4),
        Condition("self-map: I- term of T1 <= R1/4", cfg.d * f1.c * g1.c * r**P1 * S, R1 / 4),
        Condition("self-map: I+ term of T2 <= R1/2", a * f2.c * g2.c * r**P2 * S**2, R1 / 2),
        Condition("contraction: sum of Lipschitz brackets < target", q, cfg.contraction_target, strict=True),
    )
    return SmallnessReport(
        R0=R0,
        R1=R1,
        upsilon=ups,
        upsilon_tilde=ups_t,
        c_G=cG,
        c_G_lip=cGl,
        conditions=conditions,
        contraction_constant=q,
        route=_route(c),
        payoff_derivation=pc.derivation,
        c_G_wide=pc.c_G_wide,
    )


def smallness_check(cfg: ProblemConfig, find_threshold: bool = False) -> SmallnessReport:
    """Evaluate the self-map and contraction conditions with discrete norms.

    R1 is the exact (B_{alpha T})^d norm of the ball center.  With
    ``find_threshold`` the largest passing delta_g is located by bisection.
    """
    center_v, _ = ball_center(cfg)
    report = _evaluate_conditions(cfg, st_norm_b(center_v, cfg.beta))
    if not find_threshold:
        return report
    return replace(report, threshold_delta_g=delta_g_threshold(cfg))


def _passes(cfg: ProblemConfig, delta_g: float) -> bool:
    return smallness_check(cfg.with_delta_g(delta_g)).passed


def delta_g_threshold(cfg: ProblemConfig, rel_tol: float = 1e-10) -> float:
    """Largest delta_g (to ``rel_tol``) for which every condition passes."""
    if not _passes(cfg, 0.0):
        return 0.0
    hi = max(cfg.payoff.delta_g, 1e-3)
    for _ in range(200):
        if not _passes(cfg, hi):
            break
        hi *= 2.0
    else:
        return math.inf
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _passes(cfg, mid):
            lo = mid
        else:
            hi = mid
    return lo


# -- Picard iteration ----------------------------------------------------------


@dataclass(frozen=True)
class SolveReport:
    v: VectorField
    m: SpaceTimeField
    iterations: int
    update_norms: tuple
    residuals: tuple
    contraction_ratios: tuple
    converged: bool
    diverging: bool
    smallness: SmallnessReport
    message: str = ""

    @property
    def R0(self) -> float:
        return self.smallness.R0

    @property
    def R1(self) -> float:
        return self.smallness.R1

    @property
    def upsilon(self) -> float:
        return self.smallness.upsilon


NOISE_FLOOR = 1e-13


def picard_solve(
    cfg: ProblemConfig,
    initial: tuple[VectorField, SpaceTimeField] | None = None,
) -> SolveReport:
    """Iterate the fixed-point map from the ball center (or ``initial``).

    ``iterations`` counts evaluations of the map, including the final one that
    measures the residual of the returned pair.
    """
    small = smallness_check(cfg)
    nu, mu = ball_center(cfg) if initial is None else initial
    blowup = 10.0 * (small.R0 + small.R1)
    updates: list[float] = []
    diverging = False
    for it in range(cfg.max_iter):
        new_nu, new_mu = apply_map(nu, mu, cfg)
        upd = pair_norm(new_nu - nu, new_mu - mu, cfg)
        updates.append(upd)
        nu, mu = new_nu, new_mu
        log.debug("picard iteration %d: update %.3e", it + 1, upd)
        if not math.isfinite(upd) or pair_norm(nu, mu, cfg) > blowup > 0:
            diverging = True
            break
        if upd < cfg.tol:
            break
    res = residual(nu, mu, cfg) if not diverging else (math.inf, math.inf)
    scale = 1.0 + pair_norm(nu, mu, cfg) if not diverging else 1.0
    ratios = tuple(
        b / a for a, b in zip(updates, updates[1:]) if a > NOISE_FLOOR * scale and b > NOISE_FLOOR * scale
    )
    converged = (not diverging) and updates[-1] < cfg.tol and max(res) <= cfg.tol
    if diverging:
        msg = f"iterates left the ball: norm exceeded 10*(R0+R1) = {blowup:.3e}"
    elif not converged:
        msg = f"no convergence after {len(updates)} updates (last update {updates[-1]:.3e})"
        if len(updates) > 2 and updates[-1] > updates[-2] > updates[-3]:
            diverging = True
            msg += "; update norms are growing"
    else:
        msg = "converged"
    return SolveReport(
        v=nu,
        m=mu,
        iterations=len(updates) + (0 if diverging else 1),
        update_norms=tuple(updates),
        residuals=tuple(res),
        contraction_ratios=ratios,
        converged=converged,
        diverging=diverging,
        smallness=small,
        message=msg,
    )


def mass_mode_defect(m: SpaceTimeField, m0: SpectralField) -> float:
    """max_t |m_0(t) - (m0)_0|; zero for any iterate of the map."""
    centre = (slice(None),) + (m.K,) * m.d
    return float(np.max(np.abs(m.coeffs[centre] - m0.coeffs[(m0.K,) * m0.d])))

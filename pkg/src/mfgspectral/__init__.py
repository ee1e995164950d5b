"""Fourier-spectral solver for mean field games with nonlocal nonseparable Hamiltonians."""

from .hamiltonian import HamiltonianSpec, builtin, example_quadratic, example_quartic
from .measures import MeasureSpec, pair_with_test, pm0_distance, realize
from .payoff import PayoffSpec, payoff_constants
from .solver import ProblemConfig, delta_g_threshold, picard_solve, residual, smallness_check
from .spectral import SpaceTimeField, SpectralField, VectorField

__all__ = [
    "HamiltonianSpec",
    "MeasureSpec",
    "PayoffSpec",
    "ProblemConfig",
    "SpaceTimeField",
    "SpectralField",
    "VectorField",
    "builtin",
    "delta_g_threshold",
    "example_quadratic",
    "example_quartic",
    "pair_with_test",
    "payoff_constants",
    "picard_solve",
    "pm0_distance",
    "realize",
    "residual",
    "smallness_check",
]

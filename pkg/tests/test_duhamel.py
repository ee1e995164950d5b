import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds
from mfgspectral.duhamel import (
    I_minus,
    I_plus,
    QuadratureScheme,
    backward_integral,
    forward_integral,
    omega,
    phi1,
    phi2,
)
from mfgspectral.hamiltonian import eval_H2, example_quartic
from mfgspectral.measures import MeasureSpec, realize
from mfgspectral.spectral import (
    FieldMismatchError,
    SpaceTimeField,
    SpectralField,
    VectorField,
    heat_semigroup,
    norm_pm,
    st_norm_b,
    st_norm_pm_alpha,
    time_grid,
    wavenumbers,
)
from mfgspectral.verify import random_space_time, random_vector


def test_phi_functions_match_closed_forms_across_the_cutoff():
    z = np.array([0.0, 1e-8, 0.05, 0.0999, 0.1, 0.1001, 0.5, 3.0, 50.0])
    safe = np.where(z == 0, 1.0, z)
    p1 = np.where(z == 0, 1.0, -np.expm1(-safe) / safe)
    assert np.allclose(phi1(z), p1, rtol=1e-13, atol=0)
    big = z >= 0.05
    p2 = (safe + np.expm1(-safe)) / safe**2
    assert np.allclose(phi2(z)[big], p2[big], rtol=1e-12, atol=0)
    assert phi2(np.array(0.0)) == 0.5


def test_weights_are_nonnegative_and_exact_for_constants():
    d, K, T, N_t = 2, 5, 1.0, 16
    s = QuadratureScheme.build(d, K, T, N_t)
    assert np.all(s.w_near >= 0) and np.all(s.w_far >= 0)
    lam = np.sum(wavenumbers(d, K) ** 2, axis=0).astype(float)
    ones = np.ones((N_t + 1,) + lam.shape)
    y = forward_integral(ones, s)
    t = time_grid(T, N_t).reshape(-1, 1, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.where(lam == 0, t, -np.expm1(-lam * t) / np.where(lam == 0, 1, lam))
    assert np.max(np.abs(y - exact)) < 1e-13


def _constant_vector(modes, d, K, N_t, T):
    f = SpectralField.from_modes(modes, d, K)
    return VectorField(tuple(SpaceTimeField.constant(f if n == 0 else f * 0.0, N_t, T) for n in range(d)))


def test_I_plus_closed_form_for_stationary_input():
    K, N_t, T, w, k = 6, 20, 1.0, 0.7 - 0.2j, 3
    mu = SpaceTimeField.constant(SpectralField.from_modes({0: 1.0}, 1, K), N_t, T)
    h = _constant_vector({k: w}, 1, K, N_t, T)
    out = I_plus(mu, h)
    t = out.times
    expect = 1j * k * w * (1 - np.exp(-(k**2) * t)) / k**2
    assert np.max(np.abs(out.coeffs[:, K + k] - expect)) < 1e-13
    assert np.all(out.coeffs[:, K] == 0)


def test_I_minus_closed_form_and_constants():
    K, N_t, T, c = 5, 24, 2.0, 1.3 + 0.4j
    kvec = (2, -1)
    h = SpaceTimeField.constant(SpectralField.from_modes({kvec: c}, 2, K), N_t, T)
    out = I_minus(h)
    lam = sum(x * x for x in kvec)
    t = h.times
    for n in range(2):
        expect = -1j * kvec[n] * c * (1 - np.exp(-lam * (T - t))) / lam
        got = out[n].coeffs[:, K + kvec[0], K + kvec[1]]
        assert np.max(np.abs(got - expect)) < 1e-13
    const = SpaceTimeField.constant(SpectralField.from_modes({(0, 0): 5.0}, 2, K), N_t, T)
    assert all(np.all(c.coeffs == 0) for c in I_minus(const))


@given(seed=seeds)
def test_I_plus_output_has_no_mean(seed):
    rng = np.random.default_rng(seed)
    mu = random_space_time(rng, 2, 3, 6, 1.0)
    h = random_vector(rng, 2, 3, 6, 1.0)
    assert np.all(I_plus(mu, h).coeffs[:, 3, 3] == 0)


def _smooth_source(N_t, lam, T=1.0):
    t = time_grid(T, N_t).reshape(-1, 1)
    return np.cos(3 * t + 0.2 * lam) + np.sin(t) * (1 + lam / 10)


@pytest.mark.parametrize("integral", [forward_integral, backward_integral])
def test_refinement_order_is_two(integral):
    d, K, T = 1, 8, 1.0
    lam = np.arange(-K, K + 1, dtype=float) ** 2
    ref_N = 2048
    ref = integral(_smooth_source(ref_N, lam), QuadratureScheme.build(d, K, T, ref_N))
    errs = []
    for N in (16, 32, 64):
        y = integral(_smooth_source(N, lam), QuadratureScheme.build(d, K, T, N))
        errs.append(np.max(np.abs(y - ref[:: ref_N // N])))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 1.8, orders


@given(seed=seeds, alpha=st.sampled_from([0.25, 0.5, 0.75]), d=st.integers(1, 2))
def test_operator_bounds(seed, alpha, d):
    rng = np.random.default_rng(seed)
    K, N_t, T = 4, 16, 1.0
    beta = alpha * T
    mu = random_space_time(rng, d, K, N_t, T, sparse=bool(seed % 2))
    h = random_vector(rng, d, K, N_t, T, sparse=bool(seed % 2))
    lhs = st_norm_pm_alpha(I_plus(mu, h), alpha)
    assert lhs <= 1.05 / (1 - alpha) * st_norm_b(h, beta) * st_norm_pm_alpha(mu, alpha)
    g = random_space_time(rng, d, K, N_t, T, sparse=bool(seed % 2))
    assert st_norm_b(I_minus(g), beta) <= 1.05 * d * st_norm_b(g, beta)


def test_I_plus_rejects_mismatched_inputs(rng):
    mu = random_space_time(rng, 1, 3, 4, 1.0)
    with pytest.raises(FieldMismatchError):
        I_plus(mu, random_vector(rng, 1, 3, 5, 1.0))


def test_omega_without_drift_is_heat_flow(rng):
    spec = example_quartic(1)
    K, N_t, T = 6, 8, 1.0
    m0 = realize(MeasureSpec.dirac(0.0), 1, K)
    nu = VectorField((SpaceTimeField.zeros(1, K, N_t, T),))
    mu = random_space_time(rng, 1, K, N_t, T)
    out = omega(nu, mu, m0, spec)
    k = np.arange(-K, K + 1)
    assert np.allclose(out.coeffs, np.exp(-(k**2.0)), atol=1e-15)
    assert np.allclose(out.coeffs, heat_semigroup(m0, T).coeffs)


@given(seed=seeds, alpha=st.sampled_from([0.25, 0.5]))
def test_omega_bound(seed, alpha):
    rng = np.random.default_rng(seed)
    spec = example_quartic(1)
    K, N_t, T = 4, 16, 1.0
    m0 = realize(MeasureSpec.dirac(0.0), 1, K)
    nu = random_vector(rng, 1, K, N_t, T) * 0.3
    mu = random_space_time(rng, 1, K, N_t, T)
    H2 = eval_H2(spec, nu, mu)
    lhs = norm_pm(omega(nu, mu, m0, spec), alpha * T)
    rhs = norm_pm(m0, 0.0) + 1.05 / (1 - alpha) * st_norm_pm_alpha(mu, alpha) * st_norm_b(H2, alpha * T)
    assert lhs <= rhs

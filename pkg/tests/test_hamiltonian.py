import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_st, seeds
from mfgspectral.hamiltonian import (
    FunctionConstants,
    HamiltonianSpec,
    MissingConstantsError,
    ScalarPoly,
    VectorPoly,
    abs_sq,
    builtin,
    constant_poly,
    eval_H1,
    eval_H2,
    eval_poly,
    example_quadratic,
    example_quartic,
    growth_constants,
    linear_vector,
    lipschitz_bound,
    pairing_A,
)
from mfgspectral.measures import MeasureSpec, realize
from mfgspectral.spectral import SpaceTimeField, SpectralField, VectorField, st_norm_b, st_norm_pm_alpha
from mfgspectral.verify import hamiltonian_ratios

N_t, T, K = 4, 1.0, 4


def const_vec(values, d=2):
    comps = [SpaceTimeField.constant(SpectralField.from_modes({(0,) * d: a}, d, K, True), N_t, T) for a in values]
    return VectorField(tuple(comps))


def dirac_st(x0, d=1):
    return SpaceTimeField.constant(realize(MeasureSpec.dirac(x0), d, K), N_t, T)


def test_abs_sq_of_constant():
    out = eval_poly(abs_sq(2), const_vec([3.0, 0.0]))
    assert np.allclose(out.slice(2).coeffs, SpectralField.from_modes({(0, 0): 9.0}, 2, K).coeffs)


def test_linear_vector_doubles(rng):
    v = VectorField((random_st(rng, 1, K, N_t),))
    out = eval_poly(linear_vector(1, 2.0), v)
    assert np.allclose(out[0].coeffs, 2 * v[0].coeffs, atol=1e-15)


def test_abs_sq_of_cosine():
    cos = SpaceTimeField.constant(SpectralField.from_modes({1: 0.5, -1: 0.5}, 1, K, True), N_t, T)
    out = eval_poly(abs_sq(1), VectorField((cos,)))
    expect = SpectralField.from_modes({0: 0.5, 2: 0.25, -2: 0.25}, 1, K).coeffs
    assert np.allclose(out.coeffs, expect, atol=1e-15)


def test_pairing_examples():
    one = SpaceTimeField.constant(SpectralField.from_modes({0: 1.0}, 1, K, True), N_t, T)
    assert np.allclose(pairing_A(one, dirac_st(0.0)), 1.0)
    cos = SpaceTimeField.constant(SpectralField.from_modes({1: 0.5, -1: 0.5}, 1, K, True), N_t, T)
    assert np.allclose(pairing_A(cos, dirac_st(np.pi)), -1.0, atol=1e-15)


@given(seed=seeds, a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_pairing_is_bilinear(seed, a, b):
    rng = np.random.default_rng(seed)
    f, m1, m2 = (random_st(rng, 1, K, N_t) for _ in range(3))
    lhs = pairing_A(f, m1 * a + m2 * b)
    rhs = a * pairing_A(f, m1) + b * pairing_A(f, m2)
    assert np.max(np.abs(lhs - rhs)) < 1e-13 * (1 + np.max(np.abs(rhs)))


@given(seed=seeds, alpha=st.floats(0.0, 0.9))
def test_pairing_bound(seed, alpha):
    rng = np.random.default_rng(seed)
    f, m = random_st(rng, 2, 3, N_t), random_st(rng, 2, 3, N_t)
    bound = st_norm_pm_alpha(m, alpha) * st_norm_b(f, alpha * T)
    assert np.max(np.abs(pairing_A(f, m))) <= bound * (1 + 1e-12)


def test_quartic_hamiltonian_on_constants():
    spec = example_quartic(2)
    v = const_vec([1.5, 0.0])
    m = dirac_st((0.0, 0.0), 2)
    H1 = eval_H1(spec, v, m)
    assert H1.coeffs[2][K, K] == pytest.approx(1.5**4)
    assert np.count_nonzero(np.abs(H1.coeffs) > 1e-14) == N_t + 1


def test_zero_velocity_gives_zero_hamiltonian(rng):
    spec = example_quartic(1)
    v = VectorField((SpaceTimeField.zeros(1, K, N_t, T),))
    m = random_st(rng, 1, K, N_t)
    assert np.all(eval_H1(spec, v, m).coeffs == 0)
    assert all(np.all(c.coeffs == 0) for c in eval_H2(spec, v, m))


def test_quadratic_hamiltonian_ignores_unit_mass_density(rng):
    spec = example_quadratic(1)
    v = VectorField((random_st(rng, 1, K, N_t),))
    a = eval_H1(spec, v, dirac_st(0.0))
    b = eval_H1(spec, v, dirac_st(2.0))
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-14)
    assert np.allclose(a.coeffs, eval_poly(abs_sq(1), v).coeffs, atol=1e-14)


def test_growth_constant_tables():
    q = growth_constants(example_quartic(1))
    for name in ("f1", "g1", "f2"):
        assert q[name] == FunctionConstants(1.0, 2.0, 1.0, 1.0)
    assert q["g2"] == FunctionConstants(2.0, 1.0, 1.0, 0.0)
    r = growth_constants(example_quadratic(1))
    assert r["f1"] == r["f2"] == FunctionConstants(1.0, 0.0, 0.0, 0.0)
    assert r["g1"] == q["g1"] and r["g2"] == q["g2"]


def test_custom_constants_echoed_and_missing_rejected():
    table = {n: FunctionConstants(1.0, 1.0, 1.0, 1.0) for n in ("f1", "g1", "f2", "g2")}
    spec = HamiltonianSpec("mine", 1, abs_sq(1), abs_sq(1), abs_sq(1), linear_vector(1, 1.0), table)
    assert growth_constants(spec) == table
    bare = HamiltonianSpec("bare", 1, abs_sq(1), abs_sq(1), abs_sq(1), linear_vector(1, 1.0))
    with pytest.raises(MissingConstantsError):
        growth_constants(bare)


def test_lipschitz_constant_example():
    L1, _ = lipschitz_bound(example_quartic(1), 1.0, 1.0)
    assert L1 == pytest.approx(5.0)
    small = lipschitz_bound(example_quartic(1), 1e-6, 1.0)
    assert max(small) < 1e-5


def test_polynomial_validation():
    with pytest.raises(ValueError):
        ScalarPoly({(5,): 1.0})
    with pytest.raises(ValueError):
        ScalarPoly({(1,): 1.0, (1, 0): 1.0})
    with pytest.raises(ValueError):
        HamiltonianSpec("x", 2, abs_sq(2), abs_sq(2), abs_sq(2), linear_vector(1, 1.0))
    with pytest.raises(ValueError):
        builtin("nope", 1)
    assert constant_poly(2, 3.0).degree == 0
    assert VectorPoly((abs_sq(1),)).degree == 2


@pytest.mark.parametrize("make", [example_quartic, example_quadratic])
@pytest.mark.parametrize("d", [1, 2])
def test_declared_bounds_hold_on_random_inputs(make, d):
    worst = hamiltonian_ratios(np.random.default_rng(7), make(d), 30, 3, 0.5, 4, 1.0)
    assert all(v <= 1 + 1e-12 for v in worst.values()), worst

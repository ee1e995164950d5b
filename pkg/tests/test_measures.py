import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mfgspectral.measures import MeasureSpec, pair_with_test, pm0_distance, realize
from mfgspectral.spectral import SpectralField, evaluate, norm_pm, symmetry_defect

COS = SpectralField.from_modes({1: 0.5, -1: 0.5}, 1, 4, real=True)


def test_dirac_at_origin_has_unit_coefficients():
    m = realize(MeasureSpec.dirac(0.0), 1, 4)
    assert m.coeffs.shape == (9,) and np.all(m.coeffs == 1) and m.real


def test_dirac_at_pi_alternates():
    m = realize(MeasureSpec.dirac(math.pi), 1, 4)
    k = np.arange(-4, 5)
    assert np.allclose(m.coeffs, (-1.0) ** k, atol=1e-15)


def test_half_weight_superposition():
    m = realize(MeasureSpec.dirac_sum([0.0, math.pi], [0.5, 0.5]), 1, 4)
    k = np.arange(-4, 5)
    assert np.allclose(m.coeffs, (1 + (-1.0) ** k) / 2, atol=1e-15)


def test_invalid_specs_are_rejected():
    with pytest.raises(ValueError):
        MeasureSpec.dirac_sum([0.0, 1.0], [1.0, -0.5])
    with pytest.raises(ValueError):
        MeasureSpec.dirac(7.0)
    with pytest.raises(ValueError):
        MeasureSpec.dirac_sum([0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        MeasureSpec("gaussian")
    with pytest.raises(ValueError):
        MeasureSpec.density({})
    with pytest.raises(ValueError):
        realize(MeasureSpec.dirac((0.0, 0.0)), 1, 4)


def test_pm0_distance_examples():
    a = realize(MeasureSpec.dirac(0.0), 1, 64)
    assert pm0_distance(a, a) == 0
    assert pm0_distance(a, realize(MeasureSpec.dirac(1.0), 1, 64)) >= 1.99
    for K in (1, 2, 5):
        d = pm0_distance(realize(MeasureSpec.dirac(0.0), 1, K), realize(MeasureSpec.dirac(math.pi), 1, K))
        assert d == pytest.approx(2.0, abs=1e-15)


def test_pm0_distance_lower_bound_grows_with_K():
    prev = 0.0
    for K in (4, 8, 16, 32, 64):
        d = pm0_distance(realize(MeasureSpec.dirac(0.0), 1, K), realize(MeasureSpec.dirac(0.3), 1, K))
        assert prev <= d <= 2.0
        prev = d


def test_pairing_examples():
    assert pair_with_test(realize(MeasureSpec.dirac(0.0), 1, 4), COS) == pytest.approx(1.0, abs=1e-15)
    assert pair_with_test(realize(MeasureSpec.dirac(0.4), 1, 4), COS) == pytest.approx(math.cos(0.4), abs=1e-15)
    assert pair_with_test(realize(MeasureSpec.dirac(math.pi), 1, 4), COS) == pytest.approx(-1.0, abs=1e-15)


locations = st.lists(st.floats(0.0, 6.28), min_size=1, max_size=4)


@given(locs=locations, data=st.data())
def test_pm0_norm_bounded_by_mass(locs, data):
    weights = data.draw(st.lists(st.floats(0.01, 3.0), min_size=len(locs), max_size=len(locs)))
    m = realize(MeasureSpec.dirac_sum(locs, weights), 1, 6)
    assert norm_pm(m, 0.0) <= sum(weights) * (1 + 1e-14)
    same = realize(MeasureSpec.dirac_sum([locs[0]] * len(locs), weights), 1, 6)
    assert norm_pm(same, 0.0) == pytest.approx(sum(weights), rel=1e-14)


@given(x=st.tuples(st.floats(0.0, 6.28), st.floats(0.0, 6.28)), seed=st.integers(0, 2**32 - 1))
def test_pairing_with_dirac_is_point_evaluation(x, seed):
    rng = np.random.default_rng(seed)
    phi = SpectralField(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    m = realize(MeasureSpec.dirac(x), 2, 4)
    assert abs(pair_with_test(m, phi) - evaluate(phi, x)) < 1e-12


@given(locs=locations)
def test_realize_is_conjugate_symmetric(locs):
    m = realize(MeasureSpec.dirac_sum(locs, [1.0] * len(locs)), 1, 8)
    assert m.real and symmetry_defect(m.coeffs, 1) < 1e-14


def test_density_reality_flag_follows_table():
    sym = realize(MeasureSpec.density({0: 1.0, 1: 0.2j, -1: -0.2j}), 1, 3)
    assert sym.real
    skew = realize(MeasureSpec.density({0: 1.0, 1: 0.2j}), 1, 3)
    assert not skew.real
    assert MeasureSpec.density({0: 2.0}).total_mass == 2.0

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mfgspectral.spectral import SpaceTimeField, SpectralField, mode_length, reflect

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def hermitian(c, d):
    return 0.5 * (c + np.conj(reflect(c, d)))


def random_coeffs(rng, d, K, decay=0.5, real=True, lead=()):
    shape = tuple(lead) + (2 * K + 1,) * d
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.exp(-decay * mode_length(d, K))
    return hermitian(c, d) if real else c


def random_field(rng, d, K, decay=0.5, real=True):
    return SpectralField(random_coeffs(rng, d, K, decay, real), real)


def random_st(rng, d, K, N_t, T=1.0, decay=0.5, real=True):
    return SpaceTimeField(random_coeffs(rng, d, K, decay, real, lead=(N_t + 1,)), T, real)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=3)
small_K = st.integers(min_value=1, max_value=5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

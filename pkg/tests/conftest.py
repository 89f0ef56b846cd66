import mpmath as mp
import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

mp.mp.dps = 50


def mp_sf(x):
    """High-precision upper tail of N(0, 1)."""
    return mp.ncdf(-mp.mpf(x))


def mp_quantile(q):
    """Phi^{-1}(q) by root finding on the high-precision cdf."""
    q = mp.mpf(q)
    if q < mp.mpf("0.5"):
        return -mp_isf(q)
    return mp_isf(1 - q)


def mp_isf(t):
    t = mp.mpf(t)
    if t >= mp.mpf("0.5"):
        return mp.findroot(lambda x: mp.ncdf(-x) - t, 0)
    start = mp.sqrt(2 * mp.log(1 / t))
    return mp.findroot(lambda x: mp.log(mp.ncdf(-x)) - mp.log(t), start)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_correlation(rng, p, rank=None):
    """Random correlation matrix from a Gram matrix of random vectors."""
    x = rng.standard_normal((p, rank or p))
    a = x @ x.T
    d = 1.0 / np.sqrt(np.diag(a))
    a = a * d[:, None] * d[None, :]
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 1.0)
    return np.clip(a, -1.0, 1.0)

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from egoclique import tails
from oracles import binom_log_cdf, binom_log_tail, poisson_log_tail

mpmath.mp.dps = 50


def mp_binom_sf(k, n, p):
    p = mpmath.mpf(p)
    return mpmath.fsum(mpmath.binomial(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1))


def mp_poisson_sf(k, lam):
    lam = mpmath.mpf(lam)
    head = mpmath.fsum(mpmath.exp(-lam) * lam**j / mpmath.factorial(j) for j in range(k))
    return 1 - head


def test_binom_worked_examples():
    assert tails.binom_sf(3, 3, 0.5) == pytest.approx(0.125, rel=1e-15)
    assert tails.binom_sf(0, 0, 0.3) == 1.0
    assert tails.binom_sf(0, 7, 0.3) == 1.0
    assert tails.binom_sf(8, 7, 0.3) == 0.0
    assert tails.binom_sf(1, 10, 0.0) == 0.0
    assert tails.binom_sf(10, 10, 1.0) == 1.0
    assert tails.binom_sf(1, 2, 0.5) == pytest.approx(0.75, rel=1e-15)


def test_poisson_worked_examples():
    assert tails.poisson_sf(0, 0.0) == 1.0
    assert tails.poisson_sf(1, 0.0) == 0.0
    assert tails.poisson_sf(1, 2.0) == pytest.approx(1 - math.exp(-2.0), rel=1e-14)
    assert tails.poisson_sf(2, 1.0) == pytest.approx(1 - 2 * math.exp(-1.0), rel=1e-14)


@pytest.mark.parametrize("k,n,p", [
    (17, 45, 0.05), (45, 45, 0.05), (1, 4950, 1e-4), (300, 4950, 0.05),
    (2500, 5000, 0.5), (2, 3, 0.4999), (120, 1225, 0.05), (600, 1225, 0.5),
])
def test_binom_matches_high_precision(k, n, p):
    ref = mp_binom_sf(k, n, p)
    assert tails.binom_logsf(k, n, p) == pytest.approx(float(mpmath.log(ref)), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("k,lam", [
    (1, 1e-3), (5, 1e-3), (3, 2.5), (40, 10.0), (500, 500.0), (700, 500.0), (300, 500.0), (61, 12.25),
])
def test_poisson_matches_high_precision(k, lam):
    ref = mp_poisson_sf(k, lam)
    assert tails.poisson_logsf(k, lam) == pytest.approx(float(mpmath.log(ref)), rel=1e-12, abs=1e-13)


def test_extreme_tail_does_not_underflow_in_log_space():
    # P[B >= 1225] with p = 0.05 is 0.05**1225, far below the double range
    lp = tails.binom_logsf(1225, 1225, 0.05)
    assert lp == pytest.approx(1225 * math.log(0.05), rel=1e-13)
    assert tails.binom_sf(1225, 1225, 0.05) == 0.0
    assert tails.poisson_logsf(2000, 1.0) == pytest.approx(poisson_log_tail(2000, 1.0), rel=1e-12)


def test_random_queries_against_summation_oracle():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(1, 800))
        p = float(10 ** rng.uniform(-4, math.log10(0.5)))
        k = int(rng.integers(0, n + 2))
        ref = binom_log_tail(k, n, p)
        got = tails.binom_logsf(k, n, p)
        if ref == -math.inf:
            assert got == -math.inf
        else:
            assert got == pytest.approx(ref, rel=1e-10, abs=1e-10)
        lam = float(10 ** rng.uniform(-3, math.log10(500)))
        k = int(rng.integers(0, int(3 * lam) + 20))
        assert tails.poisson_logsf(k, lam) == pytest.approx(poisson_log_tail(k, lam), rel=1e-10, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.floats(1e-4, 0.99), st.data())
def test_binom_complement(n, p, data):
    k = data.draw(st.integers(1, n))
    sf = tails.binom_sf(k, n, p)
    cdf = math.exp(binom_log_cdf(k - 1, n, p))
    assert sf + cdf == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 400), st.floats(1e-4, 0.9))
def test_binom_monotone(n, p):
    ks = np.arange(0, n + 2)
    vals = tails.binom_sf_array(ks, np.full_like(ks, n), p)
    assert np.all(np.diff(vals) <= 1e-15)
    assert vals[0] == 1.0 and vals[-1] == 0.0
    # increasing p raises every tail
    higher = tails.binom_sf_array(ks, np.full_like(ks, n), min(1.0, p * 1.5))
    assert np.all(higher >= vals - 1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-3, 500.0))
def test_poisson_monotone(lam):
    ks = np.arange(0, int(2 * lam) + 10)
    vals = tails.poisson_sf_array(ks, np.full(ks.shape, lam))
    assert np.all(np.diff(vals) <= 1e-15)
    assert np.all(tails.poisson_sf_array(ks, np.full(ks.shape, lam * 1.2)) >= vals - 1e-14)


def test_array_versions_agree_with_scalars():
    rng = np.random.default_rng(3)
    n = rng.integers(0, 500, size=200)
    k = (rng.uniform(size=200) * (n + 2)).astype(np.int64)
    got = tails.binom_sf_array(k, n, 0.07)
    assert np.array_equal(got, [tails.binom_sf(int(a), int(b), 0.07) for a, b in zip(k, n)])
    lam = rng.uniform(0, 50, size=200)
    got = tails.poisson_sf_array(k, lam)
    assert np.array_equal(got, [tails.poisson_sf(int(a), float(b)) for a, b in zip(k, lam)])


@pytest.mark.parametrize("n,p", [(45, 0.05), (190, 0.05), (1225, 0.02), (10, 0.5)])
def test_super_uniform(n, p):
    # P[sf(X) <= t] <= t for X from the same Binomial, by exact enumeration
    pmf = np.array([math.exp(binom_log_tail(j, n, p)) for j in range(n + 2)])
    pmf = pmf[:-1] - pmf[1:]
    sf = tails.binom_sf_array(np.arange(n + 1), np.full(n + 1, n), p)
    for t in (1e-6, 1e-4, 0.001, 0.01, 0.05, 0.3):
        assert pmf[sf <= t].sum() <= t * (1 + 1e-9)


@pytest.mark.parametrize("n,p,t", [(45, 0.05, 2e-5), (1225, 0.05, 1e-5), (10, 0.5, 0.3), (6, 0.01, 1e-20)])
def test_threshold_k_matches_linear_scan(n, p, t):
    scan = next(j for j in range(n + 2) if tails.binom_sf(j, n, p) <= t)
    assert tails.binom_threshold_k(n, p, t) == scan


def test_threshold_k_examples():
    # sf(j, 3, 0.5) is 1, 7/8, 1/2, 1/8, 0
    assert tails.binom_threshold_k(3, 0.5, 0.2) == 3
    assert tails.binom_threshold_k(3, 0.5, 0.5) == 2
    assert tails.binom_threshold_k(3, 0.5, 0.01) == 4


@pytest.mark.parametrize("call", [
    lambda: tails.binom_sf(-1, 5, 0.1),
    lambda: tails.binom_sf(1, 5, 1.5),
    lambda: tails.binom_sf(1.5, 5, 0.1),
    lambda: tails.poisson_sf(1, -0.1),
    lambda: tails.poisson_sf(1, math.inf),
    lambda: tails.binom_threshold_k(5, 0.1, 0.0),
    lambda: tails.binom_threshold_k(5, 0.1, 1.0),
])
def test_invalid_arguments(call):
    with pytest.raises(ValueError):
        call()

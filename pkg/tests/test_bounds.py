import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensorconc import bounds
from tensorconc.bounds import BoundParams, RangeWarning
from tensorconc.errors import ConfigError, DivergentMGFError

ONE = BoundParams(c=1.0, C=1.0)
TAIL_FNS = [
    lambda t, p: bounds.convex_tensor_bound(t, 10, 3, 1.0, p),
    lambda t, p: bounds.euclidean_tensor_bound(t, 10, 3, 2.0, p),
    lambda t, p: bounds.norm_product_bound(t, 10, 3, p),
    lambda t, p: bounds.maximal_bound(t, 10, 3, p),
    lambda t, p: bounds.dist_bound(t, 10, 3, p),
]


def test_zero_is_capped():
    for fn in TAIL_FNS:
        assert fn(0.0, ONE) == 1.0


def test_convex_plug_in():
    n, d = 10, 3
    t = math.sqrt(d * n ** (d - 1))
    assert bounds.convex_tensor_bound(t, n, d, 1.0, ONE) == pytest.approx(2 * math.exp(-1))


def test_doubling_t_quadruples_exponent():
    n, d, t = 5, 2, 30.0
    b1 = bounds.convex_tensor_bound(t, n, d, 1.0, ONE)
    b2 = bounds.convex_tensor_bound(2 * t, n, d, 1.0, ONE)
    assert math.log(b2 / 2) == pytest.approx(4 * math.log(b1 / 2))


def test_euclidean_matches_convex_at_unit_operator():
    t = np.linspace(0, 20, 11)
    assert np.array_equal(bounds.euclidean_tensor_bound(t, 4, 2, 1.0), bounds.convex_tensor_bound(t, 4, 2, 1.0))


def test_euclidean_direct_value():
    assert bounds.euclidean_tensor_bound(10.0, 10, 2, 1.0, ONE) == pytest.approx(2 * math.exp(-5))
    assert bounds.euclidean_tensor_bound(10.0, 10, 2, 1.0, ONE) == pytest.approx(0.013475893998170934)


def test_dist_bound_plug_in():
    # same functional form as the norm-product bound: 2 exp(-t^2 / (d n^(d-1)))
    assert bounds.dist_bound(10.0, 10, 2, ONE) == pytest.approx(2 * math.exp(-5))


def test_maximal_plug_in():
    assert bounds.maximal_bound(1.0, 7, 7, ONE) == pytest.approx(2 * math.exp(-1))
    assert bounds.maximal_bound(0.0, 7, 7, ONE) == 1.0


def test_maximal_and_norm_bound_consistent_under_substitution():
    # t = u n^(d/2): t^2 /(d n^(d-1)) = n u^2 / d, the same shape up to the constant
    n, d, u = 30, 4, 0.7
    t = u * n ** (d / 2)
    assert bounds.tensor_shape(t, n, d) == pytest.approx(bounds.maximal_shape(u, n, d))


def test_validity_range():
    assert bounds.validity_range(4.0, 2.0) is True
    assert bounds.validity_range(4.0 + 1e-9, 2.0) is False
    assert bounds.validity_range(0.0, 2.0) is True
    assert bounds.validity_range(np.array([0.0, 5.0]), 2.0).tolist() == [True, False]
    assert bounds.wide_scale(100, 3) == pytest.approx(1000.0)
    assert bounds.wide_scale(10, 1000) == math.inf


def test_range_warnings():
    with pytest.warns(RangeWarning):
        bounds.norm_product_bound(100.0, 4, 2)
    with pytest.warns(RangeWarning):
        bounds.maximal_bound(2.5, 4, 2)
    with pytest.warns(RangeWarning):
        bounds.dist_bound(7.0, 4, 2, codim=9)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bounds.dist_bound(6.0, 4, 2, codim=9)


def test_invalid_inputs():
    with pytest.raises(ConfigError):
        bounds.convex_tensor_bound(-1.0, 3, 2, 1.0)
    with pytest.raises(ConfigError):
        bounds.convex_tensor_bound(1.0, 3, 2, 0.0)
    with pytest.raises(ConfigError):
        BoundParams(c=0.0)


@given(st.integers(2, 10**6), st.integers(1, 10**5), st.floats(0, 1e300), st.floats(1e-3, 10))
def test_bounds_finite_in_unit_interval(n, d, t, c):
    assume_ok = d * math.log(n) <= 1e6
    if not assume_ok:
        return
    p = BoundParams(c=c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        for fn in TAIL_FNS + [lambda t, p: bounds.norm_product_bound(t, n, d, p)]:
            v = fn(t, p)
            assert 0.0 <= v <= 1.0 and math.isfinite(v)
        v = bounds.convex_tensor_bound(t, n, d, 1.0, p)
        assert 0.0 <= v <= 1.0


@given(st.floats(1e-3, 5))
def test_bounds_monotone(c):
    t = np.linspace(0, 100, 201)
    p = BoundParams(c=c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        for fn in TAIL_FNS:
            v = fn(t, p)
            assert np.all(np.diff(v) <= 0)
            assert np.all(fn(t, BoundParams(c=c / 2)) >= v)


def test_bounds_no_overflow_large_degree():
    assert bounds.norm_product_bound(1e200, 10**6, 72) == 1.0
    with pytest.warns(RangeWarning):
        assert bounds.norm_product_bound(1e300, 10**6, 10) == 0.0
    assert bounds.tensor_shape(1.0, 10**6, 10**5) == 0.0


def test_chaos_mgf_bound():
    assert bounds.chaos_mgf_bound(0.0, 5.0) == 1.0
    assert bounds.chaos_mgf_bound(0.5, 2.0, ONE) == pytest.approx(math.e)
    p = BoundParams(c=0.1)
    assert bounds.chaos_mgf_valid(0.1 / 3.0, 3.0, p) is True
    assert bounds.chaos_mgf_valid(0.1 / 3.0 * (1 + 1e-9), 3.0, p) is False
    assert bounds.euclidean_mgf_valid(0.1 / 4.0, 2.0, p) is True
    assert bounds.euclidean_mgf_bound(0.5, 2.0, 1.0, ONE) == pytest.approx(math.e)


def test_gaussian_chaos_mgf_exact():
    assert bounds.gaussian_chaos_mgf_exact([1.0, -0.5], 0.0) == 1.0
    assert bounds.gaussian_chaos_mgf_exact([1.0], 0.25) == pytest.approx(0.5**-0.5 * math.exp(-0.25))
    assert bounds.gaussian_chaos_mgf_exact([1.0], 0.25) == pytest.approx(1.1013906298063676, rel=1e-12)
    # identity matrix, n = 10, lambda = 0.1
    assert bounds.gaussian_chaos_mgf_exact(np.ones(10), 0.1) == pytest.approx(1.1226789586530825, rel=1e-12)
    with pytest.raises(DivergentMGFError):
        bounds.gaussian_chaos_mgf_exact([1.0], 0.5)
    with pytest.raises(DivergentMGFError):
        bounds.gaussian_chaos_mgf_exact([0.2, -2.0], 0.3)


def test_scalar_log_inequality_on_grid():
    u = np.linspace(-0.5, 0.5, 100001)
    assert np.all(-np.log1p(-u) - u <= u**2 + 1e-15)


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=30), st.floats(-1, 1))
def test_exact_mgf_below_hw_bound(mu, s):
    mu = np.asarray(mu)
    op = np.max(np.abs(mu))
    if op == 0:
        return
    lam = 0.25 * s / op
    log_exact = bounds.log_gaussian_chaos_mgf_exact(mu, lam)
    assert log_exact <= 2.0 * lam**2 * float(mu @ mu) + 1e-12


def test_multipliers_examples():
    s = bounds.multipliers(0.125, 1.0, 1)
    assert s.sequence[1] == 0.140625
    assert s.sequence[1] <= 0.125 + 2 * 0.125**2 and abs(s.sequence[1]) <= 1 / 6
    assert s.hypothesis_ok and s.bounds_ok
    z = bounds.multipliers(0.0, 3.0, 5)
    assert set(z.sequence) == {0.0} and z.verdicts
    edge = bounds.multipliers(1 / (8 * 10 * 2), 2.0, 10)
    assert edge.hypothesis_ok and edge.bounds_ok
    flat = bounds.multipliers(0.3, 0.0, 4)
    assert flat.verdicts and set(flat.sequence) == {0.3}
    bad = bounds.multipliers(1.0, 1.0, 3)
    assert not bad.hypothesis_ok and not bad.bounds_ok
    with pytest.raises(ConfigError):
        bounds.multipliers(0.1, -1.0, 2)


@given(st.integers(1, 100), st.floats(1e-6, 10), st.floats(-1, 1))
def test_multipliers_property(d, M, s):
    sched = bounds.multipliers(s / (8 * d * M), M, d)
    assert sched.hypothesis_ok and sched.bounds_ok


def test_variance_prediction():
    assert bounds.variance_prediction(2, 3) == 12.0
    assert bounds.variance_prediction(17, 1) == 1.0
    with pytest.raises(ConfigError):
        bounds.variance_prediction(1, 2)


def test_chi_oracles():
    assert bounds.gaussian_norm_variance(100) == pytest.approx(0.49874378994938695, rel=1e-10)
    assert bounds.gaussian_norm_variance(1) == pytest.approx(1 - 2 / math.pi)
    assert bounds.gaussian_norm_product_variance(100, 1) == pytest.approx(bounds.gaussian_norm_variance(100))
    assert bounds.gaussian_norm_survival(21.0, 400) == pytest.approx(0.07690741781203396, rel=1e-10)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensorconc.errors import InsufficientDataError
from tensorconc.montecarlo.stats import fit_constant, survival_counts, variance_jackknife, wilson_interval


def test_fit_exact_log_linear():
    s = np.linspace(7, 30, 12)
    surv = 2 * np.exp(-0.3 * s)
    fit = fit_constant(s, surv, lambda g: g, n_trials=10**6)
    assert fit.c == pytest.approx(0.3, abs=1e-6)
    assert fit.r2 == pytest.approx(1.0, abs=1e-6)


def test_fit_shape_array():
    g = np.array([4.0, 5.0, 6.0, 7.0])
    shape = g**2 / 5
    fit = fit_constant(g, 2 * np.exp(-1.5 * shape), shape, n_trials=10**6)
    assert fit.c == pytest.approx(1.5, abs=1e-9)


def test_fit_flat_data():
    g = np.array([1.0, 2.0, 3.0, 4.0])
    fit = fit_constant(g, np.full(4, 0.1), lambda x: x, n_trials=10**4)
    assert fit.c == 0.0 and fit.r2 == 0.0


def test_fit_window_excludes_points():
    g = np.arange(1.0, 7.0)
    surv = np.array([0.9, 0.5, 0.2, 0.1, 0.05, 0.0])
    fit = fit_constant(g, surv, lambda x: x, n_trials=1000)
    assert fit.points == 3
    with pytest.raises(InsufficientDataError):
        fit_constant(g, surv, lambda x: x, n_trials=50)


def test_fit_negative_slope_clamped():
    g = np.array([1.0, 2.0, 3.0])
    fit = fit_constant(g, np.array([0.01, 0.05, 0.2]), lambda x: x, n_trials=10**4)
    assert fit.slope < 0 and fit.c == 0.0


def test_wilson_known_value():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.40383153, abs=1e-7)
    assert hi == pytest.approx(0.59616847, abs=1e-7)
    lo0, hi0 = wilson_interval(0, 20)
    assert lo0 == 0.0 and hi0 > 0


@given(st.integers(1, 10**6), st.floats(0, 1))
def test_wilson_contains_estimate(N, frac):
    k = int(round(frac * N))
    lo, hi = wilson_interval(k, N)
    assert 0.0 <= lo <= k / N <= hi <= 1.0


def test_survival_counts_strictness():
    x = np.array([0.0, 1.0, 1.0, 2.0])
    assert survival_counts(x, np.array([1.0]), strict=True).tolist() == [1]
    assert survival_counts(x, np.array([1.0]), strict=False).tolist() == [3]


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200), st.lists(st.floats(0, 1e3), min_size=1, max_size=10))
def test_survival_nonincreasing(samples, grid):
    g = np.unique(grid)
    c = survival_counts(np.asarray(samples), g)
    assert np.all(np.diff(c) <= 0)
    assert c.tolist() == [sum(s > t for s in samples) for t in g]


def test_jackknife_matches_bruteforce():
    rng = np.random.default_rng(0)
    x = rng.standard_exponential(60)
    var, se = variance_jackknife(x)
    assert var == pytest.approx(np.var(x, ddof=1))
    loo = np.array([np.var(np.delete(x, i), ddof=1) for i in range(x.size)])
    N = x.size
    brute = math.sqrt((N - 1) / N * np.sum((loo - loo.mean()) ** 2))
    assert se == pytest.approx(brute, rel=1e-10)


def test_jackknife_constant_and_small():
    var, se = variance_jackknife(np.full(10, 3.0))
    assert var == 0.0 and se == 0.0
    with pytest.raises(InsufficientDataError):
        variance_jackknife(np.array([1.0, 2.0]))

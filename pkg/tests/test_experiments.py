import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorconc import bounds
from tensorconc.errors import ConfigError
from tensorconc.linalg import LinearMap
from tensorconc.montecarlo import (
    ExperimentConfig,
    TestFunction,
    config_from_mapping,
    make_operator,
    run_condition_experiment,
    run_experiment,
    run_mgf_experiment,
    run_tail_experiment,
    run_variance_experiment,
)
from tensorconc.tensor_core import densify_batch


def cfg(experiment, **kw):
    return ExperimentConfig(experiment, **kw)


@pytest.mark.parametrize(
    "config",
    [
        cfg("norm-tail", n=6, d=3, trials=3000, grid=(0, 2, 5, 10, 20)),
        cfg("maximal", n=8, d=4, trials=3000, grid=(0.1, 0.3, 0.6)),
        cfg("convex-conc", n=3, d=2, trials=3000, grid=(0.1, 0.5, 1.0), function="max-functionals",
            dist="rademacher"),
        cfg("euclidean-conc", n=3, d=2, trials=3000, grid=(0.1, 0.5, 1.0, 2.0), dist="bernoulli:0.2"),
        cfg("distance", n=3, d=2, trials=3000, grid=(0.25, 0.5, 1.0), dist="uniform"),
    ],
    ids=lambda c: c.experiment.value,
)
def test_tail_report_invariants(config):
    r = run_tail_experiment(config)
    s = np.asarray(r.survival)
    assert np.all(np.diff(s) <= 0) and np.all((0 <= s) & (s <= 1))
    assert np.all(np.asarray(r.wilson_lo) <= s) and np.all(s <= np.asarray(r.wilson_hi))
    assert len(r.bound_default_c) == len(r.grid) == len(r.in_range)
    d = r.to_dict()
    assert d["metadata"]["config"]["experiment"] == config.experiment.value
    assert "workers" not in d["metadata"]["config"]
    assert d["metadata"]["build_id"]


def test_zero_grid_bound_is_one():
    r = run_tail_experiment(cfg("norm-tail", n=5, d=2, trials=500, grid=(0.0,)))
    assert r.bound_default_c == [1.0]
    assert 0.0 <= r.survival[0] <= 1.0
    assert r.fitted_c is None and "need 3" in r.fit_diagnostic


def test_workers_do_not_change_results():
    base = cfg("convex-conc", n=4, d=2, trials=5000, grid=(0.5, 1.0, 1.5), function="operator", operator="projection")
    a = run_tail_experiment(base).to_dict()
    b = run_tail_experiment(base.with_(workers=3)).to_dict()
    assert a == b


def test_norm_tail_d1_matches_chi_survival():
    n, N = 400, 10**5
    r = run_tail_experiment(cfg("norm-tail", n=n, d=1, trials=N, grid=(1.0,), master_seed=3))
    p = float(bounds.gaussian_norm_survival(math.sqrt(n) + 1.0, n))
    se = math.sqrt(p * (1 - p) / N)
    assert abs(r.survival[0] - p) <= 3 * se


def test_maximal_large_degree_monotone():
    r = run_tail_experiment(cfg("maximal", n=100, d=10, trials=2000, grid=(0.25, 0.5, 0.75, 1.0)))
    assert np.all(np.diff(r.survival) <= 0) and max(r.survival) <= 1


def test_maximal_dominance_per_trial():
    r = run_tail_experiment(cfg("maximal", n=20, d=6, trials=4000, grid=(0.1, 0.2)))
    assert np.all(r.samples["running_max"] >= r.samples["normalized_norm"])
    n, d = 20, 6
    u = np.array([0.1, 0.2])
    nt = run_tail_experiment(cfg("norm-tail", n=n, d=d, trials=4000, grid=tuple(u * n ** (d / 2))))
    assert np.all(np.asarray(r.survival) >= np.asarray(nt.survival))


def test_scaling_doubles_statistic_exactly():
    base = cfg("euclidean-conc", n=3, d=2, trials=2000, grid=(0.5, 1.0, 2.0), master_seed=11)
    A = make_operator(base)
    r1 = run_tail_experiment(base, operator=A)
    r2 = run_tail_experiment(base.with_(grid=(1.0, 2.0, 4.0)), operator=A.scaled(2.0))
    assert np.array_equal(2.0 * r1.samples["statistic"], r2.samples["statistic"])
    assert r1.survival == r2.survival


def test_baseline_consistency_d1():
    n = 30
    conv = run_tail_experiment(cfg("convex-conc", n=n, d=1, trials=3000, grid=(0.5, 1.0)))
    norm = run_tail_experiment(cfg("norm-tail", n=n, d=1, trials=3000, grid=(0.5, 1.0)))
    assert np.allclose(conv.samples["value"], norm.samples["statistic"] + math.sqrt(n), rtol=1e-13, atol=0)
    gap = conv.summary["centre"] - math.sqrt(n)
    assert -1.0 <= gap <= 0.0


def test_distance_centring_and_codim():
    r = run_tail_experiment(cfg("distance", n=4, d=2, k=5, trials=1000, grid=(0.5, 1.0, 2.0)))
    assert r.summary["codim"] == 5 and r.summary["centre"] == pytest.approx(math.sqrt(5))


def test_simple_span_distance_experiment():
    r = run_tail_experiment(cfg("distance", n=6, d=3, m=10, subspace="simple", trials=500, grid=(1.0, 2.0)))
    assert r.summary["codim"] == 216 - 10


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_catalog_functions_are_one_lipschitz(seed):
    rng = np.random.default_rng(seed)
    base = cfg("convex-conc", n=3, d=2, grid=(1.0,), master_seed=seed % 1000)
    F = rng.standard_normal((2, 2, 3))
    gap = np.linalg.norm(np.subtract(*densify_batch(F)))
    fns = [TestFunction.euclidean_norm()]
    for f in ("max-functionals", "operator", "distance"):
        from tensorconc.montecarlo import make_test_function

        fns.append(make_test_function(base.with_(function=f)))
    for f in fns:
        a, b = f(F)
        assert abs(a - b) <= gap * (1 + 1e-12) + 1e-12


def test_variance_experiment():
    r = run_variance_experiment(cfg("variance", n=100, d=1, trials=20000, master_seed=5))
    assert 0.4 <= r["ratio"] <= 0.6
    assert r["exact_ratio"] == pytest.approx(0.49874378994938695)
    rad = run_variance_experiment(cfg("variance", n=25, d=1, trials=10000, dist="rademacher"))
    assert rad["empirical_var"] == pytest.approx(0.0, abs=1e-20)
    with pytest.raises(ConfigError):
        run_variance_experiment(cfg("variance", n=10, d=700, trials=10000))
    with pytest.raises(ConfigError):
        run_variance_experiment(cfg("variance", n=10, d=2, trials=9999))


def test_condition_experiment():
    r = run_condition_experiment(cfg("condition", n=8, d=2, epsilon=0.5, trials=20, master_seed=1))
    assert r["m"] == 32
    assert r["threshold"] == pytest.approx(0.35355, abs=1e-5)
    assert r["loo_below_sigma"]
    assert len(r["sigma_min"]) == 20
    assert r["pass_rate_lo"] <= r["pass_rate"] <= r["pass_rate_hi"]


def test_condition_single_column():
    r = run_condition_experiment(cfg("condition", n=4, d=2, epsilon=0.9, trials=10))
    assert r["m"] == 1 and r["pass_rate"] == 1.0
    assert r["sigma_min_min"] > r["threshold"]


def test_condition_zero_columns():
    with pytest.raises(ConfigError):
        run_condition_experiment(cfg("condition", n=4, d=2, epsilon=0.95, trials=10))


def test_mgf_lambda_zero_is_one():
    r = run_mgf_experiment(cfg("mgf-chaos", n=5, trials=500, grid=(0.0,)))
    assert r.table_rows[0][1] == 1.0


def test_mgf_identity_matches_oracle():
    N = 2 * 10**5
    r = run_mgf_experiment(cfg("mgf-chaos", n=10, matrix="identity", trials=N, grid=(0.1,), master_seed=2))
    lam, emp, se, exact, bound, valid, unreliable = r.table_rows[0]
    assert exact == pytest.approx(1.1226789586530825, rel=1e-12)
    assert abs(emp - exact) <= 3 * se and not unreliable


def test_mgf_flags_heavy_tails():
    with pytest.warns(RuntimeWarning, match="relative standard error"):
        r = run_mgf_experiment(cfg("mgf-chaos", n=10, trials=2000, grid=(0.45,), matrix="identity"))
    # admissible (2 lam ||M|| = 0.9 < 1) but the estimator is heavy tailed there
    assert r.table_rows[0][-1] is True and r.table_rows[0][3] is not None


def test_mgf_rejects_bad_matrix():
    with pytest.raises(ConfigError):
        run_mgf_experiment(cfg("mgf-chaos", n=3, trials=10, grid=(0.1,)), M=np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ConfigError):
        run_mgf_experiment(cfg("mgf-chaos", n=101, trials=10, grid=(0.1,)))


def test_multipliers_record():
    r = run_experiment(cfg("multipliers", d=10, M=2.0, lambda0=0.00625))
    assert r.ok is True and len(r["sequence"]) == 11
    assert run_experiment(cfg("multipliers", d=3, M=1.0, lambda0=1.0)).ok is False


@pytest.mark.parametrize(
    "kw",
    [
        {"grid": (1.0, 0.5)},
        {"grid": (-1.0, 0.5)},
        {"grid": ()},
        {"grid": (1.0,), "trials": 0},
        {"grid": (1.0,), "dist": "bernoulli:0.9"},
        {"grid": (1.0,), "function": "nope"},
        {"grid": (1.0,), "epsilon": 1.5},
        {"grid": (1.0,), "master_seed": -1},
    ],
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        cfg("norm-tail", **kw)


def test_config_mapping_aliases():
    c = config_from_mapping({"experiment": "condition", "seed": 4, "N": 12, "epsilon": 0.5})
    assert c.master_seed == 4 and c.trials == 12
    with pytest.raises(ConfigError):
        config_from_mapping({"experiment": "condition", "bogus": 1})
    with pytest.raises(ConfigError):
        config_from_mapping({"n": 3})
    assert cfg("mgf-chaos", grid=(-0.1, 0.0, 0.1)).grid == (-0.1, 0.0, 0.1)


def test_operator_kinds():
    base = cfg("euclidean-conc", n=3, d=2, grid=(1.0,))
    assert make_operator(base.with_(operator="identity")).hs_norm == pytest.approx(3.0)
    P = make_operator(base.with_(operator="projection", k=4))
    assert P.op_norm == 1.0 and P.hs_norm == pytest.approx(2.0)
    G = make_operator(base.with_(k=5))
    assert isinstance(G, LinearMap) and G.matrix.shape == (5, 9)

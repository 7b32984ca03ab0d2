"""Monte Carlo experiments over simple random tensors."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .. import bounds
from .._version import build_id
from ..errors import ConfigError, InsufficientDataError
from ..linalg import LinearMap, SubspaceSpec, build_gram, sigma_min_from_gram, sigma_min_lower_bound_loo
from ..rand_sources import PILOT_MODE_OFFSET, DistKind, DistSpec, aux_generator, draw, make_generator, sample_factor_block
from ..tensor_core import LOG_SPACE_DEGREE, check_dense, log_norms, norm_product, prefix_log_ratios
from . import config as cfg
from .config import Experiment, ExperimentConfig, TestFunction
from .engine import FactorTask, TrialTask, run_trials
from .report import Record, TailReport
from .stats import fit_constant, variance_jackknife, survival_counts, wilson_interval

_MAX_LOG_DOUBLE = 709.0
MGF_UNRELIABLE_RSE = 0.10


def metadata(config: ExperimentConfig) -> dict:
    return {"config": config.echo(), "seed": config.master_seed, "build_id": build_id()}


def _params(config: ExperimentConfig) -> bounds.BoundParams:
    return bounds.BoundParams(config.c, config.C)


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class NormStat:
    """Columns: ``prod ||x_i|| - n^(d/2)`` and ``log prod ||x_i||``."""

    n: int
    d: int

    def __call__(self, F):
        logs = log_norms(F).sum(axis=-1)
        half_log = 0.5 * self.d * math.log(self.n)
        if self.d <= LOG_SPACE_DEGREE:
            stat = norm_product(F) - float(self.n) ** (0.5 * self.d)
        else:
            with np.errstate(over="ignore"):
                stat = math.exp(half_log) * np.expm1(logs - half_log)
        return np.column_stack([stat, logs])


@dataclass(frozen=True)
class MaximalStat:
    """Columns: log of the running-max statistic, log of ``prod ||x_i|| / n^(d/2)``."""

    n: int
    d: int

    def __call__(self, F):
        # both columns from one prefix array, so column 0 >= column 1 exactly
        prefix = prefix_log_ratios(F)
        return np.column_stack([prefix.max(axis=-1), prefix[:, -1]])


@dataclass(frozen=True)
class OperatorStat:
    A: LinearMap

    def __call__(self, F):
        return self.A.norm_of_image(F)


@dataclass(frozen=True)
class DistanceStat:
    L: SubspaceSpec

    def __call__(self, F):
        return self.L.distances(F)


# ------------------------------------------------------- shared ingredients


def make_operator(config: ExperimentConfig) -> LinearMap:
    """Operator for ``euclidean-conc``: fixed across trials, drawn from an
    auxiliary stream of the master seed."""
    n, d = config.n, config.d
    rng = aux_generator(config.master_seed, cfg.AUX_OPERATOR)
    if config.operator == "identity":
        return LinearMap.identity(n, d)
    N = config.ambient_dim
    if config.operator == "projection":
        codim = N // 2 if config.k is None else config.k
        return LinearMap.projection_complement(SubspaceSpec.random_gaussian(n, d, codim, rng))
    rows = N if config.k is None else config.k
    if rows < 1:
        raise ConfigError("gaussian operator needs at least one row")
    check_dense(n, d)
    return LinearMap.dense(rng.standard_normal((rows, N)) / math.sqrt(N), n, d)


def make_subspace(config: ExperimentConfig) -> SubspaceSpec:
    """Subspace L for ``distance``: codimension k (random Gaussian) or the
    span of m random Gaussian simple tensors."""
    n, d = config.n, config.d
    rng = aux_generator(config.master_seed, cfg.AUX_SUBSPACE)
    N = config.ambient_dim
    if config.subspace == "simple":
        count = config.m if config.m is not None else max(N // 2, 1)
        if count < 1:
            raise ConfigError("simple-tensor span needs at least one tensor")
        return SubspaceSpec.simple_span(rng.standard_normal((count, d, n)))
    codim = N // 2 if config.k is None else config.k
    return SubspaceSpec.random_gaussian(n, d, codim, rng)


def make_test_function(config: ExperimentConfig) -> TestFunction:
    if config.function == "norm":
        return TestFunction.euclidean_norm()
    if config.function == "operator":
        return TestFunction.operator_norm(make_operator(config))
    if config.function == "distance":
        return TestFunction.distance_to(make_subspace(config))
    rng = aux_generator(config.master_seed, cfg.AUX_FUNCTIONALS)
    return TestFunction.max_of_functionals(rng.standard_normal((config.functionals, config.d, config.n)))


def _row_elements(config: ExperimentConfig, dense: bool) -> int:
    return config.ambient_dim if dense else config.n * config.d


def _factor_task(config, statistic, dense=False, mode_offset=0):
    return FactorTask(
        config.dist, config.n, config.d, config.master_seed, statistic,
        mode_offset=mode_offset, row_elements=_row_elements(config, dense),
    )


# ---------------------------------------------------------- tail experiments


def _tail_report(config, stat, *, strict, shape, bound_default, in_range, statistic, summary, samples):
    N = stat.size
    grid = np.asarray(config.grid)
    counts = survival_counts(stat, grid, strict=strict)
    surv = counts / N
    lo, hi = wilson_interval(counts, N)
    stderr = np.sqrt(surv * (1.0 - surv) / N)
    try:
        fit = fit_constant(grid, surv, shape, N)
        fitted_c, r2, points, diag = fit.c, fit.r2, fit.points, "ok"
        bound_fitted = bounds.capped_tail(shape, fitted_c).tolist()
    except InsufficientDataError as exc:
        fitted_c = r2 = None
        points, diag, bound_fitted = 0, str(exc), None
    return TailReport(
        experiment=config.experiment.value,
        statistic=statistic,
        grid=grid.tolist(),
        survival=surv.tolist(),
        stderr=stderr.tolist(),
        wilson_lo=lo.tolist(),
        wilson_hi=hi.tolist(),
        bound_default_c=np.asarray(bound_default, dtype=float).tolist(),
        bound_fitted_c=bound_fitted,
        in_range=np.asarray(in_range, dtype=bool).tolist(),
        fitted_c=fitted_c,
        fit_r2=r2,
        fit_points=points,
        fit_diagnostic=diag,
        summary={"mean_statistic": float(stat.mean()), "std_statistic": float(stat.std()), **summary},
        metadata=metadata(config),
        samples=samples,
    )


def _quiet(fn, *args, **kwargs):
    # Range violations are recorded in ``in_range``; no need to warn as well.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", bounds.RangeWarning)
        return fn(*args, **kwargs)


def _norm_tail(config):
    n, d = config.n, config.d
    half_log = 0.5 * d * math.log(n)
    if half_log > _MAX_LOG_DOUBLE:
        raise ConfigError(f"n^(d/2) = exp({half_log:.1f}) is not representable in double precision")
    rows = run_trials(_factor_task(config, NormStat(n, d)), config.trials, config.workers)
    stat = rows[:, 0]
    grid = np.asarray(config.grid)
    shape = bounds.tensor_shape(grid, n, d)
    return _tail_report(
        config, stat, strict=True, shape=shape,
        bound_default=_quiet(bounds.norm_product_bound, grid, n, d, _params(config)),
        in_range=bounds.validity_range(grid, bounds.wide_scale(n, d)),
        statistic="prod_i ||x_i||_2 - n^(d/2)",
        summary={"centre": math.exp(half_log), "scale": bounds.variance_prediction(max(n, 2), d)},
        samples={"statistic": stat, "value": np.exp(rows[:, 1])},
    )


def _maximal(config):
    n, d = config.n, config.d
    rows = run_trials(_factor_task(config, MaximalStat(n, d)), config.trials, config.workers)
    stat = np.expm1(rows[:, 0])
    grid = np.asarray(config.grid)
    return _tail_report(
        config, stat, strict=True, shape=bounds.maximal_shape(grid, n, d),
        bound_default=_quiet(bounds.maximal_bound, grid, n, d, _params(config)),
        in_range=grid <= 2.0,
        statistic="max_k n^(-k/2) prod_{i<=k} ||x_i||_2 - 1",
        summary={},
        samples={"statistic": stat, "running_max": np.exp(rows[:, 0]), "normalized_norm": np.exp(rows[:, 1])},
    )


def _convex(config, function=None):
    n, d = config.n, config.d
    f = function if function is not None else make_test_function(config)
    dense = f.kind in ("operator", "distance")
    pilot_trials = max(10_000, config.trials // 10)
    pilot = run_trials(_factor_task(config, f, dense, PILOT_MODE_OFFSET), pilot_trials, config.workers)
    centre = float(pilot.mean())
    rms = math.sqrt(float(np.mean(pilot**2)))
    values = run_trials(_factor_task(config, f, dense), config.trials, config.workers)
    stat = np.abs(values - centre)
    grid = np.asarray(config.grid)
    return _tail_report(
        config, stat, strict=True, shape=bounds.tensor_shape(grid, n, d, f.lip),
        bound_default=bounds.convex_tensor_bound(grid, n, d, f.lip, _params(config)),
        in_range=bounds.validity_range(grid, rms),
        statistic=f"|f(X) - E f(X)| with f = {f.kind}",
        summary={
            "function": f.kind,
            "centre": centre,
            "pilot_trials": pilot_trials,
            "pilot_rms": rms,
            "wide_range_limit": 2.0 * bounds.wide_scale(n, d, f.lip),
            "bounded_coordinates": config.dist.bounded,
        },
        samples={"statistic": stat, "value": values},
    )


def _euclidean(config, operator=None):
    n, d = config.n, config.d
    A = operator if operator is not None else make_operator(config)
    if A.op_norm <= 0:
        raise ConfigError("euclidean-conc needs a nonzero operator")
    values = run_trials(_factor_task(config, OperatorStat(A), dense=A.matrix is not None or
                                     (A.complement_of is not None and A.complement_of.basis is not None)),
                        config.trials, config.workers)
    stat = np.abs(values - A.hs_norm)
    grid = np.asarray(config.grid)
    return _tail_report(
        config, stat, strict=False, shape=bounds.tensor_shape(grid, n, d, A.op_norm),
        bound_default=bounds.euclidean_tensor_bound(grid, n, d, A.op_norm, _params(config)),
        in_range=bounds.validity_range(grid, A.hs_norm),
        statistic="| ||A X|| - ||A||_HS |",
        summary={"hs_norm": A.hs_norm, "op_norm": A.op_norm, "operator": config.operator if operator is None else "custom"},
        samples={"statistic": stat, "value": values},
    )


def _distance(config, subspace=None):
    n, d = config.n, config.d
    L = subspace if subspace is not None else make_subspace(config)
    dists = run_trials(_factor_task(config, DistanceStat(L), dense=L.basis is not None), config.trials, config.workers)
    root_k = math.sqrt(L.codim)
    stat = np.abs(dists - root_k)
    grid = np.asarray(config.grid)
    return _tail_report(
        config, stat, strict=False, shape=bounds.tensor_shape(grid, n, d),
        bound_default=_quiet(bounds.dist_bound, grid, n, d, _params(config), codim=L.codim),
        in_range=bounds.validity_range(grid, root_k),
        statistic="|dist(X, L) - sqrt(codim L)|",
        summary={"codim": L.codim, "centre": root_k, "mean_distance": float(dists.mean()),
                 "subspace": L.kind.value},
        samples={"statistic": stat, "value": dists},
    )


def run_tail_experiment(config: ExperimentConfig, *, operator=None, subspace=None, function=None) -> TailReport:
    """Empirical survival of the experiment's statistic on ``config.grid``.

    ``operator``, ``subspace`` and ``function`` override the objects that
    would otherwise be drawn from the master seed.
    """
    exp = config.experiment
    if exp is Experiment.NORM_TAIL:
        return _norm_tail(config)
    if exp is Experiment.MAXIMAL:
        return _maximal(config)
    if exp is Experiment.CONVEX_CONC:
        return _convex(config, function)
    if exp is Experiment.EUCLIDEAN_CONC:
        return _euclidean(config, operator)
    if exp is Experiment.DISTANCE:
        return _distance(config, subspace)
    raise ConfigError(f"{exp.value} is not a tail experiment")


# ------------------------------------------------------------------ variance


def run_variance_experiment(config: ExperimentConfig) -> Record:
    """Sample variance of ``prod ||x_i||`` against the scale ``d n^(d-1)``."""
    n, d = config.n, config.d
    if config.trials < 10_000:
        raise ConfigError("variance experiment needs at least 10^4 trials")
    if 0.5 * d * math.log(n) > math.log(1e300):
        raise ConfigError("n^(d/2) exceeds 1e300; variance of the raw norm is not representable")
    values = run_trials(_factor_task(config, norm_product), config.trials, config.workers)
    var, se = variance_jackknife(values)
    scale = bounds.variance_prediction(n, d)
    oracle = bounds.gaussian_norm_product_variance(n, d) if config.dist.kind is DistKind.NORMAL else None
    vals = {
        "n": n, "d": d, "trials": config.trials,
        "empirical_var": var, "stderr": se, "scale": scale,
        "ratio": var / scale, "ratio_stderr": se / scale,
        "mean_norm": float(values.mean()),
        "exact_var": oracle, "exact_ratio": None if oracle is None else oracle / scale,
    }
    header = ["empirical_var", "stderr", "scale", "ratio", "ratio_stderr"]
    return Record(config.experiment.value, vals, header, [[vals[h] for h in header]], metadata(config))


# ---------------------------------------------------------------- condition


@dataclass(frozen=True)
class ConditionTask(TrialTask):
    dist: DistSpec
    n: int
    d: int
    m: int
    master_seed: int

    @property
    def chunk(self) -> int:
        return max(1, min(256, (2**20) // (self.m * self.m + self.m * self.d * self.n)))

    def block(self, start, stop):
        out = np.empty((stop - start, 2))
        F = np.empty((self.m, self.d, self.n))
        for row, trial in enumerate(range(start, stop)):
            for col in range(self.m):
                for k in range(self.d):
                    F[col, k] = draw(self.dist, self.n, make_generator(self.master_seed, trial, col * self.d + k))
            g = build_gram(F)
            out[row] = sigma_min_from_gram(g), sigma_min_lower_bound_loo(g)
        return out


def condition_columns(config: ExperimentConfig) -> int:
    if config.m is not None:
        return config.m
    if config.epsilon is None:
        raise ConfigError("condition experiment needs epsilon or m")
    return int(math.floor((1.0 - config.epsilon) * config.ambient_dim + 1e-9))


def run_condition_experiment(config: ExperimentConfig) -> Record:
    """Per-trial smallest singular value of m random simple tensors."""
    if config.epsilon is None:
        raise ConfigError("condition experiment needs epsilon")
    m = condition_columns(config)
    if m < 1:
        raise ConfigError("m = floor((1 - epsilon) n^d) is 0; nothing to condition")
    if m * config.d >= 2**31:
        raise ConfigError("m * d exceeds the mode-index range")
    rows = run_trials(ConditionTask(config.dist, config.n, config.d, m, config.master_seed), config.trials, config.workers)
    sig, loo = rows[:, 0], rows[:, 1]
    threshold = math.sqrt(config.epsilon) / 2.0
    passed = sig >= threshold
    k = int(passed.sum())
    lo, hi = wilson_interval(k, config.trials)
    vals = {
        "n": config.n, "d": config.d, "m": m, "epsilon": config.epsilon, "trials": config.trials,
        "threshold": threshold, "passes": k, "pass_rate": k / config.trials,
        "pass_rate_lo": float(lo), "pass_rate_hi": float(hi),
        "sigma_min_min": float(sig.min()), "sigma_min_median": float(np.median(sig)),
        "loo_lower_bound_min": float(loo.min()),
        "loo_below_sigma": bool(np.all(loo <= sig + 1e-8)),
        "epsilon_range_lower": config.d**2 * math.log(config.n) / config.n,
        "sigma_min": sig, "loo_lower_bound": loo,
    }
    table = [[i, float(s), float(b), bool(p)] for i, (s, b, p) in enumerate(zip(sig, loo, passed))]
    return Record(config.experiment.value, vals, ["trial", "sigma_min", "loo_lower_bound", "pass"], table,
                  metadata(config))


# --------------------------------------------------------------------- MGF


@dataclass(frozen=True)
class ChaosTask(TrialTask):
    dist: DistSpec
    M: np.ndarray
    master_seed: int

    def block(self, start, stop):
        n = self.M.shape[0]
        X = sample_factor_block(self.dist, n, 1, self.master_seed, start, stop)[:, 0, :]
        return np.einsum("ti,ij,tj->t", X, self.M, X) - np.trace(self.M)


def make_chaos_matrix(config: ExperimentConfig) -> np.ndarray:
    """Symmetric n x n matrix: identity, or random eigenbasis with
    eigenvalues uniform in [-1, 1]."""
    n = config.n
    if config.matrix == "identity":
        return np.eye(n)
    rng = aux_generator(config.master_seed, cfg.AUX_MATRIX)
    mu = rng.uniform(-1.0, 1.0, n)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    M = (Q * mu) @ Q.T
    return 0.5 * (M + M.T)


def run_mgf_experiment(config: ExperimentConfig, M=None) -> Record:
    """Empirical ``E exp(lam (x^T M x - tr M))`` on the lambda grid."""
    M = make_chaos_matrix(config) if M is None else np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ConfigError("chaos matrix must be square and symmetric")
    if n > 100:
        raise ConfigError("chaos MGF experiment supports n <= 100")
    if not config.grid:
        raise ConfigError("mgf-chaos needs a lambda grid")
    eig = np.linalg.eigvalsh(M)
    op = float(np.max(np.abs(eig)))
    hs = float(np.linalg.norm(M))
    Z = run_trials(ChaosTask(config.dist, M, config.master_seed), config.trials, config.workers)
    N = Z.size
    params = _params(config)
    gaussian = config.dist.kind is DistKind.NORMAL
    rows = []
    for lam in config.grid:
        with np.errstate(over="ignore"):
            w = np.exp(lam * Z)
        mean = float(w.mean())
        se = float(w.std(ddof=1) / math.sqrt(N)) if N > 1 else math.nan
        admissible = 2.0 * abs(lam) * op < 1.0
        exact = bounds.gaussian_chaos_mgf_exact(eig, lam) if gaussian and admissible else None
        unreliable = not math.isfinite(mean) or not (se <= MGF_UNRELIABLE_RSE * mean)
        rows.append([
            lam, mean, se, exact,
            bounds.chaos_mgf_bound(lam, hs, params),
            bounds.chaos_mgf_valid(lam, op, params),
            bool(unreliable),
        ])
    header = ["lambda", "empirical_mgf", "stderr", "exact_oracle", "bound", "valid", "unreliable"]
    vals = {
        "n": n, "trials": N, "hs_norm": hs, "op_norm": op, "trace": float(np.trace(M)),
        "eigenvalues": eig, "unreliable_any": any(r[-1] for r in rows),
    }
    if vals["unreliable_any"]:
        warnings.warn("some MGF estimates have relative standard error above 10%; heavy tails", RuntimeWarning,
                      stacklevel=2)
    return Record(config.experiment.value, vals, header, rows, metadata(config))


# -------------------------------------------------------------- dispatcher


def run_multipliers(config: ExperimentConfig) -> Record:
    if config.lambda0 is None or config.M is None:
        raise ConfigError("multipliers needs lambda0 and M")
    sched = bounds.multipliers(config.lambda0, config.M, config.d)
    d, M, l0 = sched.d, sched.M, sched.lambda0
    abs_limit = math.inf if M == 0 else 1.0 / (6.0 * d * M)
    table = [
        [k, lk, abs_limit if k else None, (l0 + 2.0 * k * M * l0 * l0) if k else None,
         sched.abs_ok[k - 1] if k else None, sched.growth_ok[k - 1] if k else None]
        for k, lk in enumerate(sched.sequence)
    ]
    vals = {
        "lambda0": l0, "M": M, "d": d, "sequence": list(sched.sequence),
        "hypothesis_limit": math.inf if M == 0 else 1.0 / (8.0 * d * M),
        "hypothesis_ok": sched.hypothesis_ok, "bounds_ok": sched.bounds_ok,
    }
    return Record(config.experiment.value, vals,
                  ["k", "lambda_k", "abs_limit", "growth_bound", "abs_ok", "growth_ok"], table,
                  metadata(config), ok=sched.verdicts)


def run_experiment(config: ExperimentConfig):
    """Run whatever ``config.experiment`` names; returns a report or record."""
    exp = config.experiment
    if exp.is_tail:
        return run_tail_experiment(config)
    if exp is Experiment.VARIANCE:
        return run_variance_experiment(config)
    if exp is Experiment.CONDITION:
        return run_condition_experiment(config)
    if exp is Experiment.MGF_CHAOS:
        return run_mgf_experiment(config)
    if exp is Experiment.MULTIPLIERS:
        return run_multipliers(config)
    from .martingale import run_martingale_experiment

    return run_martingale_experiment(config)


__all__ = [
    "run_condition_experiment",
    "run_experiment",
    "run_mgf_experiment",
    "run_tail_experiment",
    "run_variance_experiment",
]

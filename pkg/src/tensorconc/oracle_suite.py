"""Deterministic cross-checks of the fast routes against independent oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .linalg import build_gram, lambda_min, leave_one_out_distances
from .montecarlo.martingale import martingale_outcomes
from .oracles import dense_loo_distances, dense_sigma_min, khatri_rao_dense
from .rand_sources import DistKind, DistSpec, draw

GRAM_TOL = 1e-8


@dataclass
class Check:
    name: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "ok": self.ok, **self.detail}


def random_dist(rng: np.random.Generator) -> DistSpec:
    kind = list(DistKind)[rng.integers(len(DistKind))]
    if kind is DistKind.BERNOULLI:
        return DistSpec(kind, float(rng.uniform(0.05, 0.5)))
    return DistSpec(kind)


def gram_equivalence(instances: int = 200, seed: int = 0, tol: float = GRAM_TOL) -> Check:
    """Gram-route ``lambda_min`` and leave-one-out distances against the
    densified Khatri-Rao matrix (SVD and pivoted QR)."""
    rng = np.random.default_rng(seed)
    worst_sigma = worst_loo = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 7))
        F = draw(random_dist(rng), (m, d, n), rng)
        g = build_gram(F)
        K = khatri_rao_dense(F)
        worst_sigma = max(worst_sigma, abs(lambda_min(g) - dense_sigma_min(K) ** 2))
        worst_loo = max(worst_loo, float(np.max(np.abs(leave_one_out_distances(g) - dense_loo_distances(K)))))
    ok = worst_sigma <= tol and worst_loo <= tol
    return Check("gram-equivalence", ok, {"instances": instances, "max_sigma2_error": worst_sigma,
                                          "max_loo_error": worst_loo, "tolerance": tol})


def multipliers_property(count: int = 10_000, seed: int = 0) -> Check:
    """Random admissible ``(d, M, lambda0)``; both conclusions must hold."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(count):
        d = int(rng.integers(1, 101))
        M = float(rng.uniform(0.0, 10.0)) or 10.0
        lam0 = float(rng.uniform(-1.0, 1.0)) / (8.0 * d * M)
        if not bounds.multipliers(lam0, M, d).bounds_ok:
            failures += 1
    return Check("multipliers", failures == 0, {"count": count, "failures": failures})


def martingale(instances: int = 100, seed: int = 0, space_sizes=(3, 3, 3), value_bound: float = 2.0) -> Check:
    outs = martingale_outcomes(space_sizes, value_bound, instances, seed)
    failures = sum(not o.ok for o in outs)
    return Check("martingale", failures == 0, {"instances": instances, "failures": failures})


def chaos_mgf_bound_check(instances: int = 200, seed: int = 0) -> Check:
    """Exact Gaussian chaos MGF against ``exp(2 lam^2 ||M||_HS^2)`` on
    ``2 |lam| ||M||_op <= 1/2``."""
    rng = np.random.default_rng(seed)
    params = bounds.BoundParams(C=2.0)
    worst = -math.inf
    for _ in range(instances):
        n = int(rng.integers(1, 21))
        mu = rng.uniform(-1.0, 1.0, n)
        op = float(np.max(np.abs(mu)))
        lam = float(rng.uniform(-0.25, 0.25)) / op
        log_exact = bounds.log_gaussian_chaos_mgf_exact(mu, lam)
        log_bound = params.C * lam**2 * float(mu @ mu)
        worst = max(worst, log_exact - log_bound)
    return Check("chaos-mgf-bound", worst <= 1e-12, {"instances": instances, "max_log_excess": worst})


def run_all(seed: int = 0) -> list[Check]:
    return [
        gram_equivalence(seed=seed),
        multipliers_property(seed=seed),
        martingale(seed=seed),
        chaos_mgf_bound_check(seed=seed),
    ]

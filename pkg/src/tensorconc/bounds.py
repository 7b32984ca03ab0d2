"""Right-hand sides of the tensor concentration inequalities, their validity
ranges, the multiplier recursion, and exact analytic oracles.

The absolute constants ``c`` and ``C`` are not known; they are carried by
:class:`BoundParams` and can be replaced by fitted values. Every tail bound
has the form ``min(1, 2 exp(-c * shape))`` with ``shape`` evaluated in log
space, so huge ``n^(d-1)`` never overflows.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import ConfigError, DivergentMGFError

LOG2 = math.log(2.0)


class RangeWarning(UserWarning):
    """An argument lies outside the range where an inequality is proved."""


@dataclass(frozen=True)
class BoundParams:
    c: float = 0.1
    C: float = 2.0

    def __post_init__(self):
        if not (self.c > 0 and self.C > 0) or not (math.isfinite(self.c) and math.isfinite(self.C)):
            raise ConfigError(f"constants must be positive and finite, got c={self.c}, C={self.C}")


DEFAULT_PARAMS = BoundParams()


def _ret(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _exp(x):
    # overflow to inf is intended: the capped tail is then exactly 0
    with np.errstate(over="ignore"):
        return np.exp(x)


def tensor_shape(t, n: int, d: int, scale: float = 1.0):
    """``t^2 / (d n^(d-1) scale^2)``, the exponent shape without the constant."""
    t = np.asarray(t, dtype=float)
    log_den = math.log(d) + (d - 1) * math.log(n) + 2.0 * math.log(scale)
    return _ret(_exp(2.0 * _log(t) - log_den), t)


def maximal_shape(u, n: int, d: int):
    """``n u^2 / d``."""
    u = np.asarray(u, dtype=float)
    return _ret(_exp(2.0 * _log(u) + math.log(n) - math.log(d)), u)


def capped_tail(shape, c: float):
    """``min(1, 2 exp(-c * shape))``."""
    s = np.asarray(shape, dtype=float)
    expo = c * s
    out = np.where(expo <= LOG2, 1.0, np.exp(LOG2 - expo))
    return _ret(out, s)


def _check_nonneg(name, x):
    if np.any(np.asarray(x) < 0):
        raise ConfigError(f"{name} must be nonnegative")


def convex_tensor_bound(t, n: int, d: int, lip: float, params: BoundParams = DEFAULT_PARAMS):
    """Tail bound for a convex Lipschitz function of a bounded simple tensor."""
    _check_nonneg("t", t)
    if not lip > 0:
        raise ConfigError("Lipschitz constant must be positive")
    return capped_tail(tensor_shape(t, n, d, lip), params.c)


def euclidean_tensor_bound(t, n: int, d: int, op_norm: float, params: BoundParams = DEFAULT_PARAMS):
    """Tail bound for ``| ||AX|| - ||A||_HS |``."""
    _check_nonneg("t", t)
    if not op_norm > 0:
        raise ConfigError("operator norm must be positive")
    return capped_tail(tensor_shape(t, n, d, op_norm), params.c)


def norm_product_bound(t, n: int, d: int, params: BoundParams = DEFAULT_PARAMS):
    """Bound on ``P(prod ||x_i|| > n^(d/2) + t)``; proved for ``t <= 2 n^(d/2)``."""
    _check_nonneg("t", t)
    if np.any(_log(np.asarray(t, dtype=float)) > LOG2 + 0.5 * d * math.log(n)):
        warnings.warn("t exceeds 2 n^(d/2); bound is outside its proved range", RangeWarning, stacklevel=2)
    return capped_tail(tensor_shape(t, n, d), params.c)


def maximal_bound(u, n: int, d: int, params: BoundParams = DEFAULT_PARAMS):
    """Bound on ``P(max_k n^(-k/2) prod_{i<=k} ||x_i|| > 1 + u)``; proved for 0 <= u <= 2."""
    _check_nonneg("u", u)
    if np.any(np.asarray(u) > 2.0):
        warnings.warn("u exceeds 2; bound is outside its proved range", RangeWarning, stacklevel=2)
    return capped_tail(maximal_shape(u, n, d), params.c)


def dist_bound(t, n: int, d: int, params: BoundParams = DEFAULT_PARAMS, codim: int | None = None):
    """Bound on ``P(|dist(X, L) - sqrt(k)| >= t)``; proved for ``t <= 2 sqrt(k)``."""
    _check_nonneg("t", t)
    if codim is not None and np.any(np.asarray(t) > 2.0 * math.sqrt(codim)):
        warnings.warn("t exceeds 2 sqrt(codim); bound is outside its proved range", RangeWarning, stacklevel=2)
    return capped_tail(tensor_shape(t, n, d), params.c)


def validity_range(t, scale: float):
    """True where ``0 <= t <= 2 * scale``.

    ``scale`` is ``(E f^2)^(1/2)`` for convex functions, ``||A||_HS`` for
    Euclidean functions, or :func:`wide_scale` for the extended range.
    """
    ok = (np.asarray(t, dtype=float) >= 0) & (np.asarray(t, dtype=float) <= 2.0 * scale)
    return bool(ok) if ok.ndim == 0 else ok


def wide_scale(n: int, d: int, lip: float = 1.0) -> float:
    """``n^(d/2) * lip``; ``inf`` when not representable."""
    log_val = 0.5 * d * math.log(n) + math.log(lip)
    return math.exp(log_val) if log_val < 709.0 else math.inf


def chaos_mgf_bound(lam, hs_norm: float, params: BoundParams = DEFAULT_PARAMS):
    """``exp(C lam^2 ||M||_HS^2)``."""
    lam = np.asarray(lam, dtype=float)
    return _ret(np.exp(params.C * lam**2 * hs_norm**2), lam)


def euclidean_mgf_bound(lam, lip: float, mean_sq: float, params: BoundParams = DEFAULT_PARAMS):
    """``exp(C lam^2 ||f||_Lip^2 E f^2)`` for ``f(x)^2 - E f(x)^2``."""
    return chaos_mgf_bound(lam, lip * math.sqrt(mean_sq), params)


def chaos_mgf_valid(lam, op_norm: float, params: BoundParams = DEFAULT_PARAMS):
    """``|lam| <= c / ||M||_op``."""
    limit = math.inf if op_norm == 0 else params.c / op_norm
    ok = np.abs(np.asarray(lam, dtype=float)) <= limit
    return bool(ok) if ok.ndim == 0 else ok


def euclidean_mgf_valid(lam, lip: float, params: BoundParams = DEFAULT_PARAMS):
    """``|lam| <= c / ||f||_Lip^2``."""
    return chaos_mgf_valid(lam, lip**2, params)


def log_gaussian_chaos_mgf_exact(eigenvalues, lam: float) -> float:
    mu = np.asarray(eigenvalues, dtype=float).reshape(-1)
    u = 2.0 * lam * mu
    if mu.size and np.max(np.abs(u)) >= 1.0:
        raise DivergentMGFError(
            f"E exp(lam (x'Mx - tr M)) is infinite: 2|lam| max|mu| = {np.max(np.abs(u)):.6g} >= 1"
        )
    return float(np.sum(-0.5 * np.log1p(-u) - 0.5 * u))


def gaussian_chaos_mgf_exact(eigenvalues, lam: float) -> float:
    """``E exp(lam (x^T M x - tr M))`` for standard normal x.

    Equals ``prod_i (1 - 2 lam mu_i)^(-1/2) exp(-lam mu_i)`` over the
    eigenvalues ``mu_i`` of the symmetric matrix M.
    """
    return math.exp(log_gaussian_chaos_mgf_exact(eigenvalues, lam))


@dataclass(frozen=True)
class MultiplierSchedule:
    lambda0: float
    M: float
    d: int
    sequence: tuple[float, ...]
    hypothesis_ok: bool
    bounds_ok: bool
    abs_ok: tuple[bool, ...]
    growth_ok: tuple[bool, ...]

    @property
    def verdicts(self) -> bool:
        return self.hypothesis_ok and self.bounds_ok


def multipliers(lambda0: float, M: float, d: int) -> MultiplierSchedule:
    """Run ``lam_k = lam_{k-1} + M lam_{k-1}^2`` for k = 1..d and check
    ``|lam_k| <= 1/(6dM)`` and ``lam_k <= lam_0 + 2kM lam_0^2``.

    Comparisons allow a few ulps of accumulated rounding per step.
    """
    if M < 0 or not math.isfinite(M):
        raise ConfigError(f"M must be nonnegative and finite, got {M}")
    if int(d) != d or d < 1:
        raise ConfigError(f"d must be a positive integer, got {d}")
    d = int(d)
    lam = float(lambda0)
    seq = [lam]
    for _ in range(d):
        lam = lam + M * lam * lam
        seq.append(lam)

    eps = np.finfo(float).eps
    if M == 0:
        hyp = True
        abs_ok = [True] * d
        growth_ok = [s == lambda0 for s in seq[1:]]
    else:
        hyp = abs(lambda0) <= 1.0 / (8.0 * d * M)
        abs_limit = 1.0 / (6.0 * d * M)
        abs_ok, growth_ok = [], []
        for k, lk in enumerate(seq[1:], start=1):
            growth = lambda0 + 2.0 * k * M * lambda0 * lambda0
            slack = 4.0 * (k + 1) * eps * max(abs(lk), abs(growth))
            abs_ok.append(abs(lk) <= abs_limit + slack)
            growth_ok.append(lk <= growth + slack)
    return MultiplierSchedule(
        float(lambda0), float(M), d, tuple(seq), hyp, all(abs_ok) and all(growth_ok),
        tuple(abs_ok), tuple(growth_ok),
    )


def variance_prediction(n: int, d: int) -> float:
    """The scale ``d n^(d-1)`` of ``Var ||X||_2``."""
    if n < 2 or d < 1:
        raise ConfigError("variance prediction needs n >= 2 and d >= 1")
    return float(d) * float(n) ** (d - 1)


def gaussian_norm_mean(n: int) -> float:
    """``E ||g||_2`` for a standard normal g in R^n."""
    return math.sqrt(2.0) * math.exp(special.gammaln((n + 1) / 2.0) - special.gammaln(n / 2.0))


def gaussian_norm_variance(n: int) -> float:
    """Chi-distribution variance ``n - 2 (Gamma((n+1)/2) / Gamma(n/2))^2``."""
    return n - gaussian_norm_mean(n) ** 2


def gaussian_norm_product_variance(n: int, d: int) -> float:
    """``Var prod_i ||g_i||_2 = n^d - (E ||g||)^(2d)`` for independent Gaussians."""
    mu2 = gaussian_norm_mean(n) ** 2
    return float(n) ** d * -math.expm1(d * math.log(mu2 / n))


def gaussian_norm_survival(r, n: int):
    """``P(||g||_2 > r)`` for a standard normal g in R^n."""
    return stats.chi(n).sf(r)

"""Small statistical helpers: binomial intervals, tail fits, jackknife."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import InsufficientDataError

Z95 = 1.959963984540054
FIT_WINDOW_HIGH = 0.25


def wilson_interval(successes, trials: int, z: float = Z95):
    """Wilson score interval for a binomial proportion (vectorized).

    Endpoints are clipped so that ``lo <= p_hat <= hi`` even after rounding.
    """
    k = np.asarray(successes, dtype=float)
    p = k / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    centre = (p + 0.5 * z2n) / denom
    half = z * np.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / denom
    lo = np.minimum(np.maximum(centre - half, 0.0), p)
    hi = np.maximum(np.minimum(centre + half, 1.0), p)
    return lo, hi


@dataclass(frozen=True)
class FitResult:
    c: float
    r2: float
    points: int
    slope: float
    intercept: float


def fit_window(n_trials: int) -> tuple[float, float]:
    return 10.0 / n_trials, FIT_WINDOW_HIGH


def fit_constant(
    grid: Sequence[float],
    survival: Sequence[float],
    exponent_shape: Callable[[np.ndarray], np.ndarray] | Sequence[float],
    n_trials: int,
) -> FitResult:
    """Fit ``survival ~ 2 exp(-c * shape)`` on the usable tail window.

    Ordinary least squares of ``-log(survival / 2)`` on the shape values,
    restricted to points with survival in ``[10/N, 0.25]``. The constant is
    the slope clamped at 0; R^2 is 0 for constant data.
    """
    grid = np.asarray(grid, dtype=float)
    surv = np.asarray(survival, dtype=float)
    shape = np.asarray(exponent_shape(grid) if callable(exponent_shape) else exponent_shape, dtype=float)
    lo, hi = fit_window(n_trials)
    use = (surv >= lo) & (surv <= hi) & (surv > 0)
    if np.count_nonzero(use) < 3:
        raise InsufficientDataError(
            f"only {int(np.count_nonzero(use))} grid points have survival in [{lo:.3g}, {hi}]; need 3"
        )
    x = shape[use]
    y = -np.log(surv[use] / 2.0)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise InsufficientDataError("exponent shape is constant over the usable points")
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    slope = sxy / sxx
    r2 = sxy * sxy / (sxx * syy) if syy > 0 else 0.0
    return FitResult(max(slope, 0.0), r2, int(x.size), slope, float(y.mean() - slope * x.mean()))


def variance_jackknife(values: np.ndarray) -> tuple[float, float]:
    """Sample variance (ddof=1) and its jackknife standard error, in O(N)."""
    x = np.asarray(values, dtype=float)
    N = x.size
    if N < 3:
        raise InsufficientDataError("jackknife needs at least 3 values")
    mean = x.mean()
    dev2 = (x - mean) ** 2
    ss = dev2.sum()
    var = ss / (N - 1)
    # leave-one-out sums of squares about the leave-one-out means
    loo = (ss - dev2 * N / (N - 1)) / (N - 2)
    se = math.sqrt((N - 1) / N * float(np.sum((loo - loo.mean()) ** 2)))
    return float(var), se


def survival_counts(samples: np.ndarray, grid: np.ndarray, strict: bool = True) -> np.ndarray:
    """Number of samples ``> t`` (or ``>= t``) for each grid point."""
    s = np.sort(samples)
    side = "right" if strict else "left"
    return s.size - np.searchsorted(s, grid, side=side)

"""Simple tensors ``x_1 (x) ... (x) x_d`` kept in factor form.

The multiplicative identities ``||X|| = prod ||x_k||`` and
``<X, Y> = prod <x_k, y_k>`` let every statistic be computed from the
factors. Densification exists only as an oracle for small instances.

Flat layout of a dense tensor: mode 1 varies slowest, so the multi-index
``(i_1, ..., i_d)`` maps to ``i_1 n^(d-1) + ... + i_d`` (C order).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import ConfigError

if TYPE_CHECKING:
    from .linalg import LinearMap

DENSE_LIMIT = 2**24
# Above this degree norm products are accumulated as sums of logs.
LOG_SPACE_DEGREE = 8


@dataclass(frozen=True, eq=False)
class SimpleTensor:
    """A rank-one tensor given by d factor vectors of equal length n."""

    factors: tuple[np.ndarray, ...]

    def __init__(self, factors: Sequence[Sequence[float]] | np.ndarray):
        arrs = tuple(np.asarray(f, dtype=float).reshape(-1) for f in factors)
        if not arrs:
            raise ConfigError("a simple tensor needs at least one factor")
        n = arrs[0].size
        if n == 0 or any(a.size != n for a in arrs):
            raise ConfigError(f"factors must share a positive length, got {[a.size for a in arrs]}")
        for a in arrs:
            a.setflags(write=False)
        object.__setattr__(self, "factors", arrs)

    @property
    def n(self) -> int:
        return self.factors[0].size

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.d

    def as_array(self) -> np.ndarray:
        """Factors stacked into a ``(d, n)`` array."""
        return np.stack(self.factors)

    def __repr__(self):
        return f"SimpleTensor(n={self.n}, d={self.d})"


def dense_size(n: int, d: int) -> int:
    return int(n) ** int(d)


def check_dense(n: int, d: int) -> int:
    # Integer comparison so n**d cannot overflow before the check.
    size = dense_size(n, d)
    if size > DENSE_LIMIT:
        raise ConfigError(
            f"refusing to densify: n^d = {n}^{d} exceeds the limit of 2^24 = {DENSE_LIMIT} entries"
        )
    return size


def densify(x: SimpleTensor) -> np.ndarray:
    """Vector of length n^d with entry ``prod_k x_k[i_k]`` (mode 1 slowest)."""
    check_dense(x.n, x.d)
    out = x.factors[0]
    for f in x.factors[1:]:
        out = np.multiply.outer(out, f).reshape(-1)
    return np.array(out, dtype=float)


def densify_batch(factors: np.ndarray) -> np.ndarray:
    """Densify a ``(T, d, n)`` block of factors into a ``(T, n^d)`` array."""
    T, d, n = factors.shape
    check_dense(n, d)
    out = factors[:, 0, :]
    for k in range(1, d):
        out = (out[:, :, None] * factors[:, k, None, :]).reshape(T, -1)
    return np.ascontiguousarray(out)


def log_norms(factors: np.ndarray) -> np.ndarray:
    """``log ||x_k||_2`` over the last axis (``-inf`` for zero factors)."""
    with np.errstate(divide="ignore"):
        return np.log(np.linalg.norm(factors, axis=-1))


def norm_product(factors: np.ndarray) -> np.ndarray:
    """``prod_k ||x_k||_2`` for factor blocks shaped ``(..., d, n)``."""
    d = factors.shape[-2]
    norms = np.linalg.norm(factors, axis=-1)
    if d <= LOG_SPACE_DEGREE:
        return np.prod(norms, axis=-1)
    with np.errstate(divide="ignore", over="ignore"):
        return np.exp(np.log(norms).sum(axis=-1))


def log_tensor_norm(x: SimpleTensor) -> float:
    """``sum_k log ||x_k||_2``; ``-inf`` if any factor vanishes."""
    return float(log_norms(x.as_array()).sum())


def tensor_norm(x: SimpleTensor) -> float:
    """Euclidean norm of X, i.e. the product of the factor norms."""
    return float(norm_product(x.as_array()))


def tensor_inner(x: SimpleTensor, y: SimpleTensor) -> float:
    """``<X, Y> = prod_k <x_k, y_k>``."""
    if x.shape != y.shape:
        raise ConfigError(f"shape mismatch: {x.shape} vs {y.shape}")
    dots = np.einsum("kn,kn->k", x.as_array(), y.as_array())
    if x.d <= LOG_SPACE_DEGREE:
        return float(np.prod(dots))
    if np.any(dots == 0.0):
        return 0.0
    sign = -1.0 if np.count_nonzero(dots < 0) % 2 else 1.0
    return sign * math.exp(float(np.log(np.abs(dots)).sum()))


def prefix_log_ratios(factors: np.ndarray) -> np.ndarray:
    """``log(n^(-k/2) prod_{i<=k} ||x_i||)`` for k = 1..d, over the last axis."""
    n = factors.shape[-1]
    prefix = np.cumsum(log_norms(factors), axis=-1)
    k = np.arange(1, factors.shape[-2] + 1)
    return prefix - 0.5 * k * math.log(n)


def running_max_log(factors: np.ndarray) -> np.ndarray:
    """Log of ``max_k n^(-k/2) prod_{i<=k} ||x_i||`` for ``(..., d, n)`` blocks."""
    return np.max(prefix_log_ratios(factors), axis=-1)


def running_max_statistic(x: SimpleTensor) -> float:
    """The maximal-inequality statistic ``max_k n^(-k/2) prod_{i<=k} ||x_i||_2``."""
    return float(np.exp(running_max_log(x.as_array())))


def apply_operator(A: "LinearMap", x: SimpleTensor) -> float:
    """``||A X||`` for a dense map or a projection onto a subspace complement."""
    return float(A.norm_of_image(x.as_array()[None])[0])

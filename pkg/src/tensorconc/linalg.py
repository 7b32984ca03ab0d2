"""Khatri-Rao Gram algebra for columns that are simple tensors.

All quantities about the ``n^d x m`` matrix whose columns are vectorized
simple tensors are computed from its ``m x m`` Gram matrix, which is the
entrywise (Hadamard) product of the per-mode Gram matrices. Nothing here
materializes an ``n^d`` vector unless a dense subspace basis is requested.

Numerical rank is decided at ``RANK_TOL`` relative to the largest
eigenvalue. The same threshold zeroes squared distances that are below
``RANK_TOL`` times the squared column norm. The Gram route squares the
condition number, so smaller values carry no information.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .tensor_core import SimpleTensor, check_dense, densify_batch, dense_size, norm_product

RANK_TOL = 1e-10


def as_factor_array(columns) -> np.ndarray:
    """Coerce m simple tensors (or m lists of d vectors) to an ``(m, d, n)`` array."""
    if isinstance(columns, np.ndarray):
        arr = np.asarray(columns, dtype=float)
        if arr.ndim != 3:
            raise ConfigError(f"factor array must be 3-dimensional (m, d, n), got shape {arr.shape}")
        return arr
    items = [c.as_array() if isinstance(c, SimpleTensor) else SimpleTensor(c).as_array() for c in columns]
    if not items:
        raise ConfigError("need at least one column")
    shapes = {a.shape for a in items}
    if len(shapes) != 1:
        raise ConfigError(f"all columns must share (d, n), got {sorted(shapes)}")
    return np.stack(items)


@dataclass(frozen=True, eq=False)
class GramEnsemble:
    """Per-mode Gram matrices and their Hadamard product."""

    per_mode: np.ndarray  # (d, m, m)
    hadamard: np.ndarray  # (m, m)
    n: int
    d: int

    @property
    def m(self) -> int:
        return self.hadamard.shape[0]

    def column_sq_norms(self) -> np.ndarray:
        return np.diag(self.hadamard).copy()

    def without(self, j: int) -> "GramEnsemble":
        keep = np.arange(self.m) != j
        return GramEnsemble(
            self.per_mode[:, keep][:, :, keep], self.hadamard[np.ix_(keep, keep)], self.n, self.d
        )


def build_gram(factor_lists) -> GramEnsemble:
    """Gram ensemble of m simple tensors sharing (n, d). Cost O(d m^2 n)."""
    F = as_factor_array(factor_lists)
    m, d, n = F.shape
    per_mode = np.einsum("ikn,jkn->kij", F, F)
    per_mode = 0.5 * (per_mode + per_mode.transpose(0, 2, 1))
    hadamard = np.prod(per_mode, axis=0)
    return GramEnsemble(per_mode, hadamard, n, d)


def _eigh(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if not np.all(np.isfinite(H)):
        raise NumericalError("Gram matrix has non-finite entries")
    try:
        return np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"symmetric eigensolve failed ({exc}); m={H.shape[0]}, trace={np.trace(H):.6g}, "
            f"max|entry|={np.max(np.abs(H)):.6g}"
        ) from exc


def lambda_min(g: GramEnsemble) -> float:
    """Smallest eigenvalue of the Hadamard Gram, clamped at 0."""
    evals = _eigh(g.hadamard)[0]
    return max(float(evals[0]), 0.0)


def sigma_min_from_gram(g: GramEnsemble) -> float:
    """Smallest singular value of the Khatri-Rao column matrix.

    Returns 0 when the Gram is numerically rank deficient, i.e. when
    ``lambda_min <= RANK_TOL * lambda_max``.
    """
    evals = _eigh(g.hadamard)[0]
    top = float(evals[-1])
    low = float(evals[0])
    if top <= 0.0 or low <= RANK_TOL * top:
        return 0.0
    return math.sqrt(low)


def _pinv_quadratic(G: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``c^T G^+ c`` for each column of ``c`` (shape ``(r, T)``)."""
    evals, vecs = _eigh(G)
    top = float(evals[-1]) if evals.size else 0.0
    if top <= 0.0:
        return np.zeros(c.shape[1])
    keep = evals > RANK_TOL * top
    proj = vecs[:, keep].T @ c
    return np.einsum("rt,r->t", proj**2, 1.0 / evals[keep])


def _residual(sq_norm: np.ndarray, explained: np.ndarray) -> np.ndarray:
    res = sq_norm - explained
    res = np.where(res <= RANK_TOL * sq_norm, 0.0, res)
    return np.sqrt(res)


def leave_one_out_distance(g: GramEnsemble, j: int) -> float:
    """Distance from column j to the span of the other m-1 columns."""
    if not 0 <= j < g.m:
        raise ConfigError(f"column index {j} out of range for m={g.m}")
    H = g.hadamard
    sq = np.array([H[j, j]])
    if g.m == 1:
        return float(np.sqrt(max(H[j, j], 0.0)))
    others = np.arange(g.m) != j
    explained = _pinv_quadratic(H[np.ix_(others, others)], H[others, j][:, None])
    return float(_residual(sq, explained)[0])


def leave_one_out_distances(g: GramEnsemble) -> np.ndarray:
    """All m leave-one-out distances.

    For a well-conditioned Gram uses ``dist_j^2 = 1 / (G^-1)_jj``;
    otherwise falls back to one pseudo-inverse per column.
    """
    H = g.hadamard
    if g.m > 1:
        evals, vecs = _eigh(H)
        if evals[-1] > 0.0 and evals[0] > RANK_TOL * evals[-1]:
            inv_diag = np.einsum("jr,r->j", vecs**2, 1.0 / evals)
            return np.sqrt(1.0 / inv_diag)
    return np.array([leave_one_out_distance(g, j) for j in range(g.m)])


def sigma_min_lower_bound_loo(g: GramEnsemble) -> float:
    """Leave-one-out lower bound ``min_j dist(X_j, L_j) / sqrt(m)``."""
    if g.m < 1:
        raise ConfigError("need at least one column")
    return float(np.min(leave_one_out_distances(g)) / math.sqrt(g.m))


class SubspaceKind(str, enum.Enum):
    RANDOM_GAUSSIAN = "random_gaussian"
    SIMPLE_SPAN = "simple_span"


@dataclass(frozen=True, eq=False)
class SubspaceSpec:
    """A realized linear subspace L of R^(n^d).

    Use :meth:`random_gaussian` for a dense orthonormal basis (small n^d) or
    :meth:`simple_span` for the span of simple tensors (any n^d).
    """

    kind: SubspaceKind
    n: int
    d: int
    codim: int
    basis: np.ndarray | None = None
    span: np.ndarray | None = None  # (r, d, n) factors of spanning tensors
    _span_gram: np.ndarray | None = field(default=None, repr=False)

    @property
    def ambient_dim(self) -> int:
        return dense_size(self.n, self.d)

    @property
    def dim(self) -> int:
        return self.ambient_dim - self.codim

    @classmethod
    def random_gaussian(cls, n: int, d: int, codim: int, rng: np.random.Generator) -> "SubspaceSpec":
        N = check_dense(n, d)
        if not 0 <= codim <= N:
            raise ConfigError(f"codimension must lie in [0, {N}], got {codim}")
        dim = N - codim
        if dim:
            basis, _ = np.linalg.qr(rng.standard_normal((N, dim)))
        else:
            basis = np.zeros((N, 0))
        return cls(SubspaceKind.RANDOM_GAUSSIAN, n, d, codim, basis=basis)

    @classmethod
    def zero(cls, n: int, d: int) -> "SubspaceSpec":
        """L = {0}; the complement projection is the identity."""
        return cls(SubspaceKind.SIMPLE_SPAN, n, d, dense_size(n, d), span=np.zeros((0, d, n)),
                   _span_gram=np.zeros((0, 0)))

    @classmethod
    def simple_span(cls, tensors) -> "SubspaceSpec":
        F = as_factor_array(tensors)
        r, d, n = F.shape
        gram = build_gram(F).hadamard
        evals = _eigh(gram)[0]
        rank = int(np.count_nonzero(evals > RANK_TOL * evals[-1])) if evals[-1] > 0 else 0
        return cls(SubspaceKind.SIMPLE_SPAN, n, d, dense_size(n, d) - rank, span=F, _span_gram=gram)

    def distances(self, factors: np.ndarray) -> np.ndarray:
        """``dist(X, L)`` for a ``(T, d, n)`` block of simple tensors."""
        T, d, n = factors.shape
        if (n, d) != (self.n, self.d):
            raise ConfigError(f"dimension mismatch: tensors are (n={n}, d={d}), subspace ({self.n}, {self.d})")
        if self.basis is not None:
            X = densify_batch(factors)
            resid = X - (X @ self.basis) @ self.basis.T
            return np.linalg.norm(resid, axis=1)
        sq = norm_product(factors) ** 2
        if self.span.shape[0] == 0:
            return np.sqrt(sq)
        cross = np.prod(np.einsum("tkn,rkn->krt", factors, self.span), axis=0)
        return _residual(sq, _pinv_quadratic(self._span_gram, cross))


def dist_to_subspace(x: SimpleTensor, L: SubspaceSpec) -> float:
    """Euclidean distance from the simple tensor x to the subspace L."""
    return float(L.distances(x.as_array()[None])[0])


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear operator on R^(n^d): a dense matrix or ``P_{L-perp}``."""

    n: int
    d: int
    hs_norm: float
    op_norm: float
    matrix: np.ndarray | None = None
    complement_of: SubspaceSpec | None = None

    @classmethod
    def dense(cls, matrix, n: int, d: int) -> "LinearMap":
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2 or A.shape[1] != check_dense(n, d):
            raise ConfigError(f"dense map needs {dense_size(n, d)} columns, got shape {A.shape}")
        hs = float(np.linalg.norm(A))
        op = float(np.linalg.norm(A, 2)) if A.size else 0.0
        return cls(n, d, hs, min(op, hs), matrix=A)

    @classmethod
    def projection_complement(cls, L: SubspaceSpec) -> "LinearMap":
        op = 1.0 if L.codim > 0 else 0.0
        return cls(L.n, L.d, math.sqrt(L.codim), op, complement_of=L)

    @classmethod
    def identity(cls, n: int, d: int) -> "LinearMap":
        return cls.projection_complement(SubspaceSpec.zero(n, d))

    def scaled(self, a: float) -> "LinearMap":
        if self.matrix is None:
            raise ConfigError("only dense maps can be rescaled")
        return LinearMap.dense(a * self.matrix, self.n, self.d)

    def norm_of_image(self, factors: np.ndarray) -> np.ndarray:
        """``||A X||_2`` for a ``(T, d, n)`` block of simple tensors."""
        if self.complement_of is not None:
            return self.complement_of.distances(factors)
        T, d, n = factors.shape
        if (n, d) != (self.n, self.d):
            raise ConfigError(f"dimension mismatch: tensors are (n={n}, d={d}), map expects ({self.n}, {self.d})")
        return np.linalg.norm(densify_batch(factors) @ self.matrix.T, axis=1)

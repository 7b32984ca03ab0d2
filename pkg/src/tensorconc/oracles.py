"""Dense reference computations for small instances.

These materialize the Khatri-Rao matrix and use SVD / QR directly, so they
share no code path with the Gram route in :mod:`tensorconc.linalg`.
"""
from __future__ import annotations

import numpy as np


def khatri_rao_dense(factors: np.ndarray) -> np.ndarray:
    """``(n^d, m)`` matrix whose column i is the densified i-th tensor."""
    cols = np.empty((factors.shape[0], factors.shape[2] ** factors.shape[1]))
    for i, fac in enumerate(factors):
        col = fac[0]
        for f in fac[1:]:
            col = np.kron(col, f)
        cols[i] = col
    return cols.T


def dense_sigma_min(K: np.ndarray) -> float:
    """``min_{|a|=1} |K a|``; zero when K has more columns than rows."""
    rows, cols = K.shape
    if cols > rows:
        return 0.0
    return float(np.linalg.svd(K, compute_uv=False)[-1])


def qr_distance(v: np.ndarray, spanning: np.ndarray, rtol: float = 1e-10) -> float:
    """Distance from v to the column span of ``spanning`` via pivoted QR."""
    if spanning.shape[1] == 0:
        return float(np.linalg.norm(v))
    from scipy.linalg import qr

    Q, R, _ = qr(spanning, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.count_nonzero(diag > rtol * diag[0])) if diag.size and diag[0] > 0 else 0
    Q = Q[:, :rank]
    resid = v - Q @ (Q.T @ v)
    # second pass of Gram-Schmidt for accuracy
    resid = resid - Q @ (Q.T @ resid)
    return float(np.linalg.norm(resid))


def dense_loo_distances(K: np.ndarray) -> np.ndarray:
    m = K.shape[1]
    return np.array([qr_distance(K[:, j], np.delete(K, j, axis=1)) for j in range(m)])


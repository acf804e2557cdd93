"""Dense and partial singular value decompositions.

Small problems (``min(m, n) <= DENSE_CUTOFF``) always use LAPACK; larger ones
use ARPACK's implicitly restarted Lanczos (through ``scipy.sparse.linalg.svds``)
with a start vector drawn from a caller-seeded generator, so runs are
reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, svds

DENSE_CUTOFF = 64


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray            # m x k, orthonormal columns
    singular_values: np.ndarray  # length k, nonincreasing
    V: np.ndarray            # n x k, orthonormal columns

    @property
    def k(self) -> int:
        return int(self.singular_values.size)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


class SvdConvergenceError(RuntimeError):
    """Lanczos iteration hit its cap; `best` holds the singular values that did converge."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def dense_svd(Z) -> SvdResult:
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    return SvdResult(U, s, Vt.T)


def _use_dense(shape, k) -> bool:
    p = min(shape)
    return p <= DENSE_CUTOFF or k >= p // 2


def partial_svd(Z, k: int, tol: float = 1e-12, seed: int = 0, maxiter=None) -> SvdResult:
    """Leading `k` singular triplets of `Z`, largest first."""
    Z = np.asarray(Z, dtype=np.float64)
    p = min(Z.shape)
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, {p}], got {k}")
    if _use_dense(Z.shape, k) or not np.any(Z):
        full = dense_svd(Z)
        return SvdResult(full.U[:, :k], full.singular_values[:k], full.V[:, :k])
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(p)
    try:
        U, s, Vt = svds(Z, k=k, tol=tol, v0=v0, maxiter=maxiter, solver="arpack")
    except ArpackNoConvergence as exc:
        # converged Ritz values of Z'Z (possibly none)
        eig = np.asarray(exc.eigenvalues if exc.eigenvalues is not None else [], dtype=float)
        best = np.sqrt(np.sort(np.abs(eig))[::-1])
        raise SvdConvergenceError(f"Lanczos SVD did not converge for k={k}", best) from exc
    order = np.argsort(s)[::-1]
    return SvdResult(U[:, order], s[order], Vt[order].T)


def top_singular_pair(Z, seed: int = 0):
    """Return ``(sigma1, u, v)`` with ``u`` of shape (m, 1) and ``v`` of shape (n, 1)."""
    Z = np.asarray(Z, dtype=np.float64)
    if not np.any(Z):
        raise ValueError("top singular pair of the zero matrix is undefined")
    res = partial_svd(Z, 1, seed=seed)
    return float(res.singular_values[0]), res.U[:, :1], res.V[:, :1]


def thresholded_svd(Z, threshold: float, rank_hint: int = 0, seed: int = 0) -> SvdResult:
    """All singular triplets with value above `threshold`.

    Above the dense cutoff this brackets the rank: it requests
    ``rank_hint + 1`` triplets and doubles the request until the smallest one
    computed falls at or below `threshold`.
    """
    Z = np.asarray(Z, dtype=np.float64)
    p = min(Z.shape)
    k = max(int(rank_hint) + 1, 1)
    while True:
        if _use_dense(Z.shape, k) or not np.any(Z):
            res = dense_svd(Z)
            break
        res = partial_svd(Z, k, seed=seed)
        if res.singular_values[-1] <= threshold:
            break
        k = min(2 * k, p)
    keep = int(np.count_nonzero(res.singular_values > threshold))
    return SvdResult(res.U[:, :keep], res.singular_values[:keep], res.V[:, :keep])

"""Proximal operators, smoothings and projections shared by the solvers."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .model import fro_norm
from .svd import dense_svd, thresholded_svd


def vec_shrink(Z, nu):
    """Entrywise soft-thresholding ``sign(Z) * max(|Z| - nu, 0)``."""
    if nu < 0:
        raise ValueError("threshold must be nonnegative")
    Z = np.asarray(Z, dtype=np.float64)
    return np.sign(Z) * np.maximum(np.abs(Z) - nu, 0.0)


def mat_shrink(Z, nu, rank_hint=None, seed=0, full_output=False):
    """Singular value thresholding: ``U diag((sigma - nu)_+) V'``.

    Parameters
    ----------
    Z : (m, n) array
    nu : float
        Threshold, nonnegative.
    rank_hint : int, optional
        Expected output rank.  When given, large matrices use a partial SVD
        that only resolves singular values above `nu`.
    full_output : bool
        Also return the positive shrunken singular values (their count is
        the rank, their sum the nuclear norm of the result).
    """
    if nu < 0:
        raise ValueError("threshold must be nonnegative")
    Z = np.asarray(Z, dtype=np.float64)
    if rank_hint is None:
        res = dense_svd(Z)
    else:
        res = thresholded_svd(Z, nu, rank_hint=rank_hint, seed=seed)
    s = np.maximum(res.singular_values - nu, 0.0)
    r = int(np.count_nonzero(s))
    X = (res.U[:, :r] * s[:r]) @ res.V[:, :r].T
    if X.shape != Z.shape:  # r == 0 with an empty basis
        X = np.zeros_like(Z)
    return (X, s[:r]) if full_output else X


def smoothed_l1(S, nu, rho):
    """Huber smoothing of ``rho ||S||_1`` and its gradient.

    Value is ``max {<S, Z> - nu/2 ||Z||_F^2 : ||Z||_inf <= rho}``; the
    maximiser ``clip(S / nu, -rho, rho)`` is the gradient.
    """
    S = np.asarray(S, dtype=np.float64)
    a = np.abs(S)
    quad = a <= nu * rho
    vals = np.where(quad, a * a / (2.0 * nu), rho * a - 0.5 * nu * rho * rho)
    grad = np.clip(S / nu, -rho, rho)
    return float(np.sum(vals.ravel())), grad


def smoothed_nuclear(L, mu):
    """Smoothing of ``||L||_*`` over the spectral-norm unit ball, with gradient."""
    res = dense_svd(np.asarray(L, dtype=np.float64))
    s = res.singular_values
    vals = np.where(s <= mu, s * s / (2.0 * mu), s - 0.5 * mu)
    w = np.minimum(s / mu, 1.0)
    grad = (res.U * w) @ res.V.T
    return float(np.sum(vals)), grad


def huber_prox(Z, nu, rho, t):
    """Entrywise minimiser of ``t * h(x) + (x - z)^2 / 2`` for the Huber `h`
    used by :func:`smoothed_l1`."""
    Z = np.asarray(Z, dtype=np.float64)
    knee = rho * (nu + t)
    return np.where(np.abs(Z) <= knee, Z * (nu / (nu + t)), Z - t * rho * np.sign(Z))


def proj_fro_ball(Z, center, radius):
    """Euclidean projection of `Z` onto ``{X : ||X - center||_F <= radius}``."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    Z = np.asarray(Z, dtype=np.float64)
    center = np.broadcast_to(np.asarray(center, dtype=np.float64), Z.shape)
    D = Z - center
    nd = fro_norm(D)
    if nd <= radius:
        return Z.copy()
    if radius == 0:
        return np.array(center, copy=True)
    return center + D * (radius / nd)


def l1_ball_threshold(a, radius):
    """Threshold ``tau`` with ``sum(max(a - tau, 0)) == radius`` for ``a >= 0``."""
    u = np.sort(np.asarray(a, dtype=np.float64).ravel())[::-1]
    if np.sum(u) <= radius:
        return 0.0
    css = np.cumsum(u) - radius
    idx = np.arange(1, u.size + 1)
    k = np.nonzero(u - css / idx > 0)[0][-1]
    return float(css[k] / (k + 1))


def shrink_l1_ball(Z, nu, radius):
    """Prox of ``nu ||X||_1`` restricted to ``||X||_1 <= radius``."""
    Z = np.asarray(Z, dtype=np.float64)
    X = vec_shrink(Z, nu)
    if np.sum(np.abs(X)) <= radius:
        return X
    return vec_shrink(Z, max(nu, l1_ball_threshold(np.abs(Z), radius)))


def _ball_shift(a, xi, sigma):
    """Root ``phi >= 0`` of ``sum_i min(a_i / (phi + xi), 1)^2 phi^2 = sigma^2``.

    ``phi`` is the reciprocal of the ball multiplier; working with it keeps
    every quantity below ``max(a)``.  Entry ``i`` sits on the linear branch
    while ``phi < a_i - xi``; sorting those breakpoints isolates the segment
    holding the root, where the equation is smooth and increasing.
    """
    a = np.sort(a)[::-1]
    sq = np.cumsum(a * a)
    total = sq[-1]
    target = sigma * sigma
    nlin = int(np.count_nonzero(a > xi))
    phi_bp = a[:nlin] - xi                      # nonincreasing
    j_idx = np.arange(1, nlin + 1)
    g_bp = phi_bp ** 2 * (j_idx + (total - sq[:nlin]) / (phi_bp + xi) ** 2)
    k = int(np.count_nonzero(g_bp >= target))   # g_bp is nonincreasing too
    if k == 0:                                  # every entry on the quadratic branch
        return xi * sigma / (np.sqrt(total) - sigma)
    hi = phi_bp[k - 1]
    lo = phi_bp[k] if k < nlin else 0.0
    rest = total - sq[k - 1]

    def h(phi):
        return phi * phi * (k + rest / (phi + xi) ** 2) - target

    # k phi^2 <= g(phi) <= (k + rest / xi^2) phi^2 tightens the bracket
    lo = max(lo, sigma / np.sqrt(k + rest / (xi * xi)))
    hi = min(hi, sigma / np.sqrt(k))
    if h(lo) >= 0:
        return lo
    if h(hi) <= 0:
        return hi
    return brentq(h, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def joint_prox_chi(L_tilde, M, sigma, xi):
    """Exact minimiser of ``||S||_1 + ||L - L_tilde||_F^2 / (2 xi)`` subject to
    ``||L + S - M||_F <= sigma``.

    Returns
    -------
    L, S : (m, n) arrays
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if xi <= 0:
        raise ValueError("xi must be positive")
    L_tilde = np.asarray(L_tilde, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    Y = L_tilde - M
    if fro_norm(Y) <= sigma:
        return L_tilde.copy(), np.zeros_like(M)
    if sigma == 0:
        S = vec_shrink(-Y, xi)
        return M - S, S
    a = np.abs(Y)
    phi = _ball_shift(a.ravel(), xi, sigma)
    # E = Y - D with D = L + S - M; |E| shrinks toward 0 on each branch.
    quad = a <= xi + phi
    e_abs = np.where(quad, a * (xi / (phi + xi)), a - phi)
    E = np.sign(Y) * e_abs
    D = Y - E
    nd = fro_norm(D)
    if nd > sigma:
        D *= sigma / nd
    S = -vec_shrink(E, xi)
    return M + D - S, S

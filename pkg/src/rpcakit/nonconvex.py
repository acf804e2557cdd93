"""Solvers for factored and rank/sparsity-constrained models, plus the two
epsilon-stationarity measures.

Parameter mapping onto :class:`RpcaProblem`: ``rank_cap`` is the factor
width ``r`` (or GoDec's rank bound), ``sparsity_cap`` is GoDec's support
size, ``rho`` weighs ``||S||_1``, ``rho1`` the factor norms and ``rho3`` the
noise block.  The proximal weight ``H = h I`` of ADMM-g and proximal BCD is
``options.prox_weight``.

Factored solvers start from the balanced rank-r SVD of M (``U = U_r
sqrt(Sigma_r)``, ``V = V_r sqrt(Sigma_r)``) unless a :class:`FactoredState`
is passed as `init`.  A zero start is a stationary point of every factored
model, so it is only useful for degenerate checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .base import DivergenceError, Recorder, SolverOptions, default_beta, rel_change, stop_test
from .model import Formulation, RpcaProblem, fro_norm, fro_norm_sq, l1_norm, make_decomposition
from .prox import vec_shrink
from .svd import partial_svd


@dataclass
class FactoredState:
    """Iterate of a factored solver.  ``L`` is only used by ADMM-g, where it
    is a separate block tied to ``U V'`` through the objective."""

    U: np.ndarray
    V: np.ndarray
    S: np.ndarray
    N: Optional[np.ndarray] = None
    Lambda: Optional[np.ndarray] = None
    L: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.U.shape[1] != self.V.shape[1]:
            raise ValueError("U and V must have the same number of columns")
        shape = (self.U.shape[0], self.V.shape[0])
        for name in ("S", "N", "Lambda", "L"):
            X = getattr(self, name)
            if X is not None and X.shape != shape:
                raise ValueError(f"{name} has shape {X.shape}, expected {shape}")

    @property
    def low_rank(self) -> np.ndarray:
        return self.U @ self.V.T


def _rank(problem: RpcaProblem) -> int:
    if problem.rank_cap < 1:
        raise ValueError("rank_cap must be at least 1 for this solver")
    return problem.rank_cap


def balanced_factors(Z, r: int, seed: int = 0):
    """``(U sqrt(Sigma), V sqrt(Sigma))`` from the rank-`r` SVD of `Z`."""
    Z = np.asarray(Z, dtype=np.float64)
    if not np.any(Z):
        return np.zeros((Z.shape[0], r)), np.zeros((Z.shape[1], r))
    res = partial_svd(Z, r, seed=seed)
    root = np.sqrt(res.singular_values)
    return res.U * root, res.V * root


def _start(problem, r, init, seed, with_noise=False, with_multiplier=False):
    if init is not None:
        st = replace(init)
    else:
        U, V = balanced_factors(problem.M, r, seed)
        st = FactoredState(U, V, np.zeros(problem.shape))
    if with_noise and st.N is None:
        st.N = np.zeros(problem.shape)
    if with_multiplier and st.Lambda is None:
        st.Lambda = np.zeros(problem.shape)
    if st.U.shape != (problem.shape[0], r) or st.V.shape != (problem.shape[1], r):
        raise ValueError("initial factors do not match (m, r) and (n, r)")
    return st


# -- GoDec -----------------------------------------------------------------------

def keep_largest(Z, k: int) -> np.ndarray:
    """Zero all but the `k` largest-magnitude entries; ties go to the lowest
    row-major index."""
    Z = np.asarray(Z, dtype=np.float64)
    out = np.zeros_like(Z)
    if k <= 0:
        return out
    flat = np.abs(Z).ravel()
    idx = np.argsort(-flat, kind="stable")[:k]
    out.ravel()[idx] = Z.ravel()[idx]
    return out


def truncate_rank(Z, r: int, seed: int = 0) -> np.ndarray:
    """Best rank-`r` approximation of `Z` in Frobenius norm."""
    if not np.any(Z):
        return np.zeros_like(Z)
    return partial_svd(Z, r, seed=seed).reconstruct()


def solve_godec(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """Alternating projections for ``min ||L + S - M||_F^2`` subject to
    ``rank(L) <= rank_cap`` and ``||S||_0 <= sparsity_cap``.

    Stops once the residual is below ``tol * max(1, ||M||_F)`` or the iterate
    stops moving.
    """
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    M = problem.M
    r = _rank(problem)
    scale = fro_norm(M)
    L, S = np.zeros_like(M), np.zeros_like(M)
    rec.record(0, L, S, fro_norm_sq(M), scale, force=True)
    status = "max_iter"
    for k in range(1, options.max_iter + 1):
        old = (L, S)
        L = truncate_rank(M - S, r, options.seed)
        S = keep_largest(M - L, problem.sparsity_cap)
        res = fro_norm(L + S - M)
        rec.record(k, L, S, res * res, res)
        rec.notify(k, L=L, S=S)
        if res <= options.tol * max(1.0, scale) or rel_change((L, S), old) <= options.tol:
            status = "converged"
            break
    res = fro_norm(L + S - M)
    rec.record(k, L, S, res * res, res, force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.RPCP)
    d.objective = res * res
    return d, rec.finish(status, k)


# -- LMafit ----------------------------------------------------------------------

def _right_solve(B, G, shift=0.0):
    """Solve ``X (G + shift I) = B``; returns ``(X, regularized)``.

    A ``1e-12`` Tikhonov term is added only if the system matrix is
    numerically singular.
    """
    A = G + shift * np.eye(G.shape[0])
    if np.linalg.cond(A) < 1.0 / np.finfo(float).eps:
        return np.linalg.solve(A, B.T).T, False
    A = A + 1e-12 * max(1.0, float(np.trace(A)) / A.shape[0]) * np.eye(A.shape[0])
    return np.linalg.solve(A, B.T).T, True


LMAFIT_GROWTH = 0.2


def solve_lmafit(problem: RpcaProblem, options=None, *, init=None, truth=None, sink=None,
                 callback=None):
    """ADMM for ``min ||S||_1  s.t.  U V' + S = M`` with ``r = rank_cap``.

    The U- and V-steps are least-squares solves, the S-step soft-thresholds
    at ``1 / beta``.  The penalty starts at ``mn / (4 ||M||_1)`` and grows
    linearly with rate ``beta_growth`` (default 0.2).
    """
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    M = problem.M
    r = _rank(problem)
    st = _start(problem, r, init, options.seed, with_multiplier=True)
    U, V, S, Lam = st.U, st.V, st.S, st.Lambda
    beta0 = options.beta0 or default_beta(M)
    scale = fro_norm(M)
    L = U @ V.T
    rec.record(0, L, S, l1_norm(S), fro_norm(L + S - M), force=True)
    status, flagged = "max_iter", 0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0, growth=LMAFIT_GROWTH)
        old = (L, S)
        Z = M - S + Lam / beta
        U, f1 = _right_solve(Z @ V, V.T @ V)
        V, f2 = _right_solve(Z.T @ U, U.T @ U)
        flagged += f1 + f2
        L = U @ V.T
        S = vec_shrink(M - L + Lam / beta, 1.0 / beta)
        R = L + S - M
        Lam_prev, Lam = Lam, Lam - beta * R
        res = fro_norm(R)
        rec.record(k, L, S, l1_norm(S), res)
        rec.notify(k, U=U, V=V, L=L, S=S, Lam=Lam, Lam_prev=Lam_prev, beta=beta)
        if stop_test(res, rel_change((L, S), old), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, l1_norm(S), fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.RPCP, U=U, V=V)
    d.objective = l1_norm(S)
    return d, rec.finish(status, k, Lam=Lam, beta=beta, regularized_solves=flagged)


# -- gradient descent on the factors ---------------------------------------------

def sparse_estimator(Z, alpha: float) -> np.ndarray:
    """Keep the entries of `Z` whose magnitude is among the top ``alpha``
    fraction of both their row and their column; zero the rest."""
    Z = np.asarray(Z, dtype=np.float64)
    m, n = Z.shape
    A = np.abs(Z)
    kr = max(1, int(math.ceil(alpha * n)))
    kc = max(1, int(math.ceil(alpha * m)))
    row_thr = -np.partition(-A, kr - 1, axis=1)[:, kr - 1]
    col_thr = -np.partition(-A, kc - 1, axis=0)[kc - 1, :]
    keep = (A >= row_thr[:, None]) & (A >= col_thr[None, :]) & (A > 0)
    return np.where(keep, Z, 0.0)


def solve_factored_gd(problem: RpcaProblem, options=None, *, truth=None, sink=None,
                      callback=None):
    """Two-phase gradient method on ``Q = ||U V' + S - M||_F^2``.

    Phase one sets ``S0`` by :func:`sparse_estimator` with fraction
    ``options.corruption`` and balanced factors from the rank-r SVD of
    ``M - S0``.  Phase two alternates a gradient step on U, one on V (step
    ``eta``, default ``1 / sigma_1(M - S0)``, applied to ``Q / 2``) and a fresh
    sparse estimate of ``M - U V'`` at the wider fraction ``2 alpha``, which
    leaves room for rows and columns holding more outliers than average.  If
    a sweep increases Q, the step is halved and the sweep retried from the
    previous state, at most five times.
    """
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    M = problem.M
    r = _rank(problem)
    alpha = options.corruption
    scale = fro_norm(M)
    S = sparse_estimator(M, alpha)
    U, V = balanced_factors(M - S, r, options.seed)
    if options.eta is not None:
        eta = options.eta
    else:
        s1 = float(np.sum(U[:, :1] ** 2)) if np.any(U) else 0.0
        eta = 1.0 / s1 if s1 > 0 else 1.0
    L = U @ V.T
    Q = fro_norm_sq(L + S - M)
    rec.record(0, L, S, Q, math.sqrt(Q), force=True)
    status, restarts = "max_iter", 0
    k = 0
    while k < options.max_iter:
        k += 1
        R = U @ V.T + S - M
        U_new = U - eta * (R @ V)
        R = U_new @ V.T + S - M
        V_new = V - eta * (R.T @ U_new)
        L_new = U_new @ V_new.T
        S_new = sparse_estimator(M - L_new, min(1.0, 2.0 * alpha))
        Q_new = fro_norm_sq(L_new + S_new - M)
        if not math.isfinite(Q_new) or Q_new > Q * (1 + 1e-8) + 1e-14 * scale * scale:
            restarts += 1
            if restarts > 5:
                raise DivergenceError(f"Q increased after {restarts - 1} step halvings")
            eta *= 0.5
            k -= 1
            continue
        change = rel_change((L_new, S_new), (L, S))
        U, V, L, S, Q = U_new, V_new, L_new, S_new, Q_new
        rec.record(k, L, S, Q, math.sqrt(Q))
        rec.notify(k, U=U, V=V, L=L, S=S, eta=eta)
        if math.sqrt(Q) <= options.tol * max(1.0, scale) or change <= options.tol:
            status = "converged"
            break
    rec.record(k, L, S, Q, math.sqrt(Q), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.RPCP, U=U, V=V)
    d.objective = Q
    return d, rec.finish(status, k, eta=eta, restarts=restarts)


# -- generalized conditional gradient ----------------------------------------------

def cg_radii(problem: RpcaProblem):
    """Feasible-set radii: factors ``||M||_F / sqrt(rho1)``, S (l1) ``||M||_F^2 / (2 rho)``."""
    m2 = fro_norm_sq(problem.M)
    return math.sqrt(m2 / problem.rho1), m2 / (2.0 * problem.rho)


def _cg_smooth(problem, U, V, S):
    R = U @ V.T + S - problem.M
    f = 0.5 * fro_norm_sq(R) + 0.5 * problem.rho1 * (fro_norm_sq(U) + fro_norm_sq(V))
    return f, R


def _cg_gradient(problem, U, V, R):
    return R @ V + problem.rho1 * U, R.T @ U + problem.rho1 * V, R


def _ball_vertex(G, X, radius):
    g = fro_norm(G)
    if g == 0:
        return X.copy()
    return -radius * G / g


def _l1_vertex(G, rho, radius):
    out = np.zeros_like(G)
    idx = int(np.argmax(np.abs(G)))
    i, j = divmod(idx, G.shape[1])
    if abs(G[i, j]) > rho:
        out[i, j] = -radius * np.sign(G[i, j])
    return out


def cg_direction(problem: RpcaProblem, U, V, S):
    """Solve the linearised subproblem at ``(U, V, S)``.

    Returns ``(U_bar, V_bar, S_bar, grads, f)`` with `grads` the gradient
    triple of the smooth part and `f` its value.
    """
    R_uv, R_s = cg_radii(problem)
    f, R = _cg_smooth(problem, U, V, S)
    gU, gV, gS = _cg_gradient(problem, U, V, R)
    Ub = _ball_vertex(gU, U, R_uv)
    Vb = _ball_vertex(gV, V, R_uv)
    Sb = _l1_vertex(gS, problem.rho, R_s)
    return Ub, Vb, Sb, (gU, gV, gS), f


def _check_cg_feasible(problem, U, V, S):
    R_uv, R_s = cg_radii(problem)
    tol = 1e-9
    if (fro_norm(U) > R_uv * (1 + tol) or fro_norm(V) > R_uv * (1 + tol)
            or l1_norm(S) > R_s * (1 + tol)):
        raise ValueError("state is outside the feasible set of the bounded factored model")


def eps_stationarity_cg(state: FactoredState, problem: RpcaProblem) -> float:
    """``-inf_y <grad f(x), y - x> + rho ||S_y||_1 - rho ||S_x||_1`` over the
    feasible set.  Zero exactly at stationary points, positive elsewhere."""
    U, V, S = state.U, state.V, state.S
    _check_cg_feasible(problem, U, V, S)
    Ub, Vb, Sb, (gU, gV, gS), _ = cg_direction(problem, U, V, S)
    psi = (float(np.sum(gU * (Ub - U))) + float(np.sum(gV * (Vb - V)))
           + float(np.sum(gS * (Sb - S))) + problem.rho * (l1_norm(Sb) - l1_norm(S)))
    return max(0.0, -psi)


def _project_factor(X, radius):
    nx = fro_norm(X)
    return X * (radius / nx) if nx > radius else X


def solve_gen_cond_grad(problem: RpcaProblem, options=None, *, init=None, truth=None, sink=None,
                        callback=None):
    """Generalized conditional gradient on
    ``1/2 ||U V' + S - M||^2 + rho1/2 (||U||^2 + ||V||^2) + rho ||S||_1``
    over the bounded feasible set (see :func:`cg_radii`).

    The step minimises the quadratic upper model
    ``a b + a^2 gamma/2 ||D||^2 + a rho (||S_bar||_1 - ||S||_1)`` over
    ``a in [0, 1]``.  The curvature ``gamma`` is estimated adaptively:
    doubled until the true objective lies below the model, then halved
    at the start of the next iteration.  The stationarity column of the
    trace holds :func:`eps_stationarity_cg` at each iterate.
    """
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    M, rho = problem.M, problem.rho
    r = _rank(problem)
    st = _start(problem, r, init, options.seed)
    R_uv, _ = cg_radii(problem)
    U, V, S = _project_factor(st.U, R_uv), _project_factor(st.V, R_uv), st.S
    _check_cg_feasible(problem, U, V, S)
    gamma = 1.0
    F = _cg_smooth(problem, U, V, S)[0] + rho * l1_norm(S)
    stat = eps_stationarity_cg(FactoredState(U, V, S), problem)
    rec.record(0, U @ V.T, S, F, fro_norm(U @ V.T + S - M), stationarity=stat, force=True)
    status = "max_iter"
    for k in range(1, options.max_iter + 1):
        Ub, Vb, Sb, (gU, gV, gS), f = cg_direction(problem, U, V, S)
        dU, dV, dS = Ub - U, Vb - V, Sb - S
        b = (float(np.sum(gU * dU)) + float(np.sum(gV * dV)) + float(np.sum(gS * dS))
             + rho * (l1_norm(Sb) - l1_norm(S)))
        if b >= 0:                       # stationary: no descent direction
            status = "converged"
            break
        d2 = fro_norm_sq(dU) + fro_norm_sq(dV) + fro_norm_sq(dS)
        gamma = max(gamma * 0.5, 1e-12)
        while True:
            a = min(1.0, -b / (gamma * d2))
            Un, Vn, Sn = U + a * dU, V + a * dV, S + a * dS
            Fn = _cg_smooth(problem, Un, Vn, Sn)[0] + rho * l1_norm(Sn)
            if Fn <= F + a * b + 0.5 * a * a * gamma * d2 + 1e-12 * abs(F):
                break
            gamma *= 2.0
        change = rel_change((Un, Vn, Sn), (U, V, S))
        U, V, S, F = Un, Vn, Sn, Fn
        stat = eps_stationarity_cg(FactoredState(U, V, S), problem)
        L = U @ V.T
        rec.record(k, L, S, F, fro_norm(L + S - M), stationarity=stat)
        rec.notify(k, U=U, V=V, S=S, alpha=a, gamma=gamma, stationarity=stat)
        if change <= options.tol and stat <= options.tol * max(1.0, abs(F)):
            status = "converged"
            break
    L = U @ V.T
    stat = eps_stationarity_cg(FactoredState(U, V, S), problem)
    rec.record(k, L, S, F, fro_norm(L + S - M), stationarity=stat, force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.Factored, U=U, V=V)
    return d, rec.finish(status, k, stationarity=stat, gamma=gamma)


# -- ADMM-g ------------------------------------------------------------------------

def admm_g_objective(problem: RpcaProblem, state: FactoredState) -> float:
    """``1/2 ||L - U V'||^2 + rho1/2 (||U||^2 + ||V||^2) + rho ||S||_1 + rho3 ||N||^2``."""
    U, V = state.U, state.V
    return (0.5 * fro_norm_sq(state.L - U @ V.T)
            + 0.5 * problem.rho1 * (fro_norm_sq(U) + fro_norm_sq(V))
            + problem.rho * l1_norm(state.S) + problem.rho3 * fro_norm_sq(state.N))


def kkt_residuals(state: FactoredState, problem: RpcaProblem) -> dict:
    """Per-block residuals of the perturbed KKT system of the ADMM-g model.

    All blocks are unconstrained, so each variational inequality reduces to
    the norm of ``grad_i f + g_i - A_i' Lambda``; for S the l1 subgradient
    ``g`` is chosen entrywise to minimise the residual.
    """
    if state.Lambda is None:
        raise ValueError("the KKT measure needs the multiplier Lambda")
    if state.L is None or state.N is None:
        raise ValueError("the KKT measure needs the L and N blocks")
    M, Lam = problem.M, state.Lambda
    U, V, S, N, L = state.U, state.V, state.S, state.N, state.L
    rho, rho1, rho3 = problem.rho, problem.rho1, problem.rho3
    E = L - U @ V.T
    sub = np.where(S > 0, rho, np.where(S < 0, -rho, np.clip(Lam, -rho, rho)))
    return {
        "L": fro_norm(E - Lam),
        "U": fro_norm(-E @ V + rho1 * U),
        "V": fro_norm(-E.T @ U + rho1 * V),
        "S": fro_norm(sub - Lam),
        "N": fro_norm(2.0 * rho3 * N - Lam),
        "primal": fro_norm(L + S + N - M),
    }


def eps_stationarity_kkt(state: FactoredState, problem: RpcaProblem) -> float:
    """Largest of the residuals returned by :func:`kkt_residuals`."""
    return max(kkt_residuals(state, problem).values())


def admm_g_beta0(problem: RpcaProblem) -> float:
    """Default penalty, a multiple of the N-block curvature ``2 rho3``."""
    return max(1.0, 8.0 * problem.rho3)


def solve_admm_g(problem: RpcaProblem, options=None, *, init=None, truth=None, sink=None,
                 callback=None):
    """ADMM-g on ``1/2 ||L - U V'||^2 + rho1/2 (||U||^2 + ||V||^2) + rho ||S||_1
    + rho3 ||N||^2`` subject to ``L + S + N = M``.

    The L, U, V and S blocks minimise the augmented Lagrangian plus
    ``h/2 ||. - .^k||^2`` in closed form; N takes one gradient step of length
    ``eta`` (default ``1 / (2 rho3 + beta)``).  Stops when the KKT measure is
    below ``tol * max(1, ||M||_F)``.
    """
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    M, rho, rho1, rho3 = problem.M, problem.rho, problem.rho1, problem.rho3
    h = options.prox_weight
    r = _rank(problem)
    st = _start(problem, r, init, options.seed, with_noise=True, with_multiplier=True)
    if st.L is None:
        st.L = st.U @ st.V.T
    L, U, V, S, N, Lam = st.L, st.U, st.V, st.S, st.N, st.Lambda
    beta0 = options.beta0 or admm_g_beta0(problem)
    scale = fro_norm(M)
    eye = np.eye(r)
    rec.record(0, L, S, admm_g_objective(problem, st), fro_norm(L + S + N - M), force=True)
    status, stat = "max_iter", math.inf
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0)
        eta = options.eta or 1.0 / (2.0 * rho3 + beta)
        L = (U @ V.T + Lam + beta * (M - S - N) + h * L) / (1.0 + beta + h)
        U = np.linalg.solve(V.T @ V + (rho1 + h) * eye, (L @ V + h * U).T).T
        V = np.linalg.solve(U.T @ U + (rho1 + h) * eye, (L.T @ U + h * V).T).T
        S = vec_shrink((Lam + beta * (M - L - N) + h * S) / (beta + h), rho / (beta + h))
        N = N - eta * (2.0 * rho3 * N - Lam + beta * (L + S + N - M))
        R = L + S + N - M
        Lam_prev, Lam = Lam, Lam - beta * R
        cur = FactoredState(U, V, S, N, Lam, L)
        stat = eps_stationarity_kkt(cur, problem)
        rec.record(k, L, S, admm_g_objective(problem, cur), fro_norm(R), stationarity=stat)
        rec.notify(k, L=L, U=U, V=V, S=S, N=N, Lam=Lam, Lam_prev=Lam_prev, beta=beta, eta=eta)
        if stat <= options.tol * max(1.0, scale):
            status = "converged"
            break
    cur = FactoredState(U, V, S, N, Lam, L)
    rec.record(k, L, S, admm_g_objective(problem, cur), fro_norm(L + S + N - M),
               stationarity=stat, force=True)
    d = make_decomposition(problem, L, S, N=N, formulation=Formulation.Factored, U=U, V=V)
    d.objective = admm_g_objective(problem, cur)
    return d, rec.finish(status, k, Lam=Lam, beta=beta, stationarity=stat, state=cur)


# -- proximal block coordinate descent ---------------------------------------------

def bcd_objective(problem: RpcaProblem, U, V, S, N) -> float:
    """``1/2 ||M - S - N - U V'||^2 + rho1/2 (||U||^2 + ||V||^2) + rho ||S||_1 + rho3 ||N||^2``."""
    return (0.5 * fro_norm_sq(problem.M - S - N - U @ V.T)
            + 0.5 * problem.rho1 * (fro_norm_sq(U) + fro_norm_sq(V))
            + problem.rho * l1_norm(S) + problem.rho3 * fro_norm_sq(N))


def solve_prox_bcd(problem: RpcaProblem, options=None, *, init=None, truth=None, sink=None,
                   callback=None):
    """Cyclic proximal block minimisation of :func:`bcd_objective` over U, V, S, N.

    Every sweep decreases the objective by at least ``h/2`` times the squared
    size of the step.  Stops when the relative change falls below `tol`.
    """
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    M, rho, rho1, rho3 = problem.M, problem.rho, problem.rho1, problem.rho3
    h = options.prox_weight
    r = _rank(problem)
    st = _start(problem, r, init, options.seed, with_noise=True)
    U, V, S, N = st.U, st.V, st.S, st.N
    eye = np.eye(r)
    F = bcd_objective(problem, U, V, S, N)
    rec.record(0, U @ V.T, S, F, fro_norm(U @ V.T + S + N - M), force=True)
    status = "max_iter"
    for k in range(1, options.max_iter + 1):
        old = (U, V, S, N)
        R = M - S - N
        U = np.linalg.solve(V.T @ V + (rho1 + h) * eye, (R @ V + h * U).T).T
        V = np.linalg.solve(U.T @ U + (rho1 + h) * eye, (R.T @ U + h * V).T).T
        L = U @ V.T
        S = vec_shrink((M - N - L + h * S) / (1.0 + h), rho / (1.0 + h))
        N = (M - S - L + h * N) / (1.0 + 2.0 * rho3 + h)
        F_prev, F = F, bcd_objective(problem, U, V, S, N)
        rec.record(k, L, S, F, fro_norm(L + S + N - M))
        rec.notify(k, U=U, V=V, S=S, N=N, F=F, F_prev=F_prev, old=old)
        if rel_change((U, V, S, N), old) <= options.tol:
            status = "converged"
            break
    L = U @ V.T
    rec.record(k, L, S, F, fro_norm(L + S + N - M), force=True)
    d = make_decomposition(problem, L, S, N=N, formulation=Formulation.Factored, U=U, V=V)
    return d, rec.finish(status, k)

"""Solvers for the convex formulations.

Every solver has the signature::

    solve_xxx(problem, options=None, *, truth=None, sink=None, callback=None)
        -> (Decomposition, Trace)

and starts from the all-zero point.  Multiplier conventions follow the
augmented Lagrangian ``f - <Lam, constraint> + beta/2 ||constraint||_F^2``.
"""

from __future__ import annotations

import math

import numpy as np

from .base import DivergenceError, Recorder, SolverOptions, default_beta, rel_change, stop_test
from .model import (Formulation, RpcaProblem, fro_norm, fro_norm_sq, fw_weights, l1_norm,
                    make_decomposition, nuclear_norm)
from .prox import (huber_prox, joint_prox_chi, mat_shrink, proj_fro_ball, shrink_l1_ball,
                   smoothed_nuclear, vec_shrink)
from .svd import top_singular_pair


def _setup(problem, options, truth, sink, callback):
    options = options or SolverOptions()
    rec = Recorder(options, truth=truth, sink=sink, callback=callback)
    Z = np.zeros(problem.shape)
    return options, rec, Z


def next_t(t: float) -> float:
    """Nesterov momentum sequence ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2``."""
    return (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0


def _penalty_step(problem, options):
    tau_max = 1.0 / (2.0 * problem.mu)
    tau = tau_max if options.tau is None else options.tau
    if tau > tau_max * (1 + 1e-12):
        raise ValueError(f"step tau={tau} exceeds 1/(2 mu)={tau_max}")
    return tau


def _penalty_objective(problem, nuc, S, L):
    return nuc + problem.rho * l1_norm(S) + 0.5 * problem.mu * fro_norm_sq(L + S - problem.M)


# -- penalty formulation: proximal gradient --------------------------------------

def solve_pgm(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """Proximal gradient on ``||L||_* + rho ||S||_1 + mu/2 ||L + S - M||_F^2``.

    Raises :class:`DivergenceError` if the objective rises on two consecutive
    iterations, which can only happen when the step is too long.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho = problem.M, problem.rho
    tau = _penalty_step(problem, options)
    L, S = Z, Z.copy()
    f_prev = _penalty_objective(problem, 0.0, S, L)
    rec.record(0, L, S, f_prev, fro_norm(M), force=True)
    status, rises, rank = "max_iter", 0, 0
    for k in range(1, options.max_iter + 1):
        G = problem.mu * (L + S - M)
        L_new, sv = mat_shrink(L - tau * G, tau, full_output=True)
        S_new = vec_shrink(S - tau * G, rho * tau)
        rank = sv.size
        f = _penalty_objective(problem, float(np.sum(sv)), S_new, L_new)
        rises = rises + 1 if f > f_prev + 1e-9 * max(1.0, abs(f_prev)) else 0
        if rises >= 2:
            raise DivergenceError(f"objective increased twice in a row at iteration {k}")
        change = rel_change((L_new, S_new), (L, S))
        L, S, f_prev = L_new, S_new, f
        rec.record(k, L, S, f, fro_norm(L + S - M))
        rec.notify(k, L=L, S=S, objective=f)
        if change <= options.tol:
            status = "converged"
            break
    rec.record(k, L, S, f_prev, fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.PenaltySPCP)
    return d, rec.finish(status, k, rank=rank)


def solve_apgm(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """Accelerated proximal gradient (Nesterov momentum, ``t_{-1} = t_0 = 1``)
    on the penalty formulation.  Not monotone, so no divergence check."""
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho = problem.M, problem.rho
    tau = _penalty_step(problem, options)
    L, S = Z, Z.copy()
    L_prev, S_prev = L, S
    t_prev = t = 1.0
    f = _penalty_objective(problem, 0.0, S, L)
    rec.record(0, L, S, f, fro_norm(M), force=True)
    status = "max_iter"
    for k in range(1, options.max_iter + 1):
        w = (t_prev - 1.0) / t
        Lb = L + w * (L - L_prev)
        Sb = S + w * (S - S_prev)
        G = problem.mu * (Lb + Sb - M)
        L_new, sv = mat_shrink(Lb - tau * G, tau, full_output=True)
        S_new = vec_shrink(Sb - tau * G, rho * tau)
        t_prev, t = t, next_t(t)
        change = rel_change((L_new, S_new), (L, S))
        L_prev, S_prev, L, S = L, S, L_new, S_new
        f = _penalty_objective(problem, float(np.sum(sv)), S, L)
        rec.record(k, L, S, f, fro_norm(L + S - M))
        rec.notify(k, L=L, S=S, objective=f, t=t)
        if change <= options.tol:
            status = "converged"
            break
    rec.record(k, L, S, f, fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.PenaltySPCP)
    return d, rec.finish(status, k)


# -- equality-constrained formulation -------------------------------------------

def solve_ialm(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """Inexact augmented Lagrangian method for ``L + S = M``.

    The joint (L, S) subproblem is approximated by at most ``inner_iter``
    alternating prox sweeps, stopping early once the sweep changes the
    iterate by less than ``0.1 * tol`` relative.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho = problem.M, problem.rho
    beta0 = options.beta0 or default_beta(M)
    scale = fro_norm(M)
    L, S, Lam = Z, Z.copy(), Z.copy()
    rec.record(0, L, S, 0.0, scale, force=True)
    status, rank, nuc = "max_iter", 0, 0.0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0)
        L_out, S_out = L, S
        for _ in range(options.inner_iter):
            L_in, S_in = L, S
            L, sv = mat_shrink(M - S + Lam / beta, 1.0 / beta, rank_hint=rank,
                               seed=options.seed, full_output=True)
            rank, nuc = sv.size, float(np.sum(sv))
            S = vec_shrink(M - L + Lam / beta, rho / beta)
            if rel_change((L, S), (L_in, S_in)) <= 0.1 * options.tol:
                break
        R = L + S - M
        Lam_prev, Lam = Lam, Lam - beta * R
        res = fro_norm(R)
        f = nuc + rho * l1_norm(S)
        rec.record(k, L, S, f, res)
        rec.notify(k, L=L, S=S, Lam=Lam, Lam_prev=Lam_prev, beta=beta)
        if stop_test(res, rel_change((L, S), (L_out, S_out)), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, nuc + rho * l1_norm(S), fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.RPCP)
    return d, rec.finish(status, k, Lam=Lam, beta=beta)


def solve_admm2(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """Two-block ADMM for ``min ||L||_* + rho ||S||_1  s.t.  L + S = M``."""
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho = problem.M, problem.rho
    beta0 = options.beta0 or default_beta(M)
    scale = fro_norm(M)
    L, S, Lam = Z, Z.copy(), Z.copy()
    rec.record(0, L, S, 0.0, scale, force=True)
    status, rank, f = "max_iter", 0, 0.0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0)
        L_old, S_old = L, S
        L, sv = mat_shrink(M - S + Lam / beta, 1.0 / beta, rank_hint=rank,
                           seed=options.seed, full_output=True)
        rank = sv.size
        S = vec_shrink(M - L + Lam / beta, rho / beta)
        R = L + S - M
        Lam_prev, Lam = Lam, Lam - beta * R
        res = fro_norm(R)
        f = float(np.sum(sv)) + rho * l1_norm(S)
        rec.record(k, L, S, f, res)
        rec.notify(k, L=L, S=S, Lam=Lam, Lam_prev=Lam_prev, beta=beta)
        if stop_test(res, rel_change((L, S), (L_old, S_old)), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, f, fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.RPCP)
    return d, rec.finish(status, k, Lam=Lam, beta=beta)


def solve_alt_linearization(problem: RpcaProblem, options=None, *, truth=None, sink=None,
                            callback=None):
    """Alternating linearization (symmetric ADMM) on the problem with
    ``rho ||S||_1`` replaced by its Huber smoothing of parameter ``options.nu``.

    Two multiplier updates per iteration: one after the L-step, one after the
    S-step.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho, nu = problem.M, problem.rho, options.nu
    beta0 = options.beta0 or default_beta(M)
    scale = fro_norm(M)
    L, S, Lam = Z, Z.copy(), Z.copy()
    rec.record(0, L, S, 0.0, scale, force=True)
    status, rank, f = "max_iter", 0, 0.0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0)
        L_old, S_old = L, S
        L, sv = mat_shrink(M - S + Lam / beta, 1.0 / beta, rank_hint=rank,
                           seed=options.seed, full_output=True)
        rank = sv.size
        Lam_prev = Lam
        Lam_half = Lam - beta * (L + S - M)
        S = huber_prox(M - L + Lam_half / beta, nu, rho, 1.0 / beta)
        R = L + S - M
        Lam = Lam_half - beta * R
        res = fro_norm(R)
        f = float(np.sum(sv)) + rho * l1_norm(S)
        rec.record(k, L, S, f, res)
        rec.notify(k, L=L, S=S, S_prev=S_old, Lam=Lam, Lam_half=Lam_half, Lam_prev=Lam_prev,
                   beta=beta)
        if stop_test(res, rel_change((L, S), (L_old, S_old)), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, f, fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.RPCP)
    return d, rec.finish(status, k, Lam=Lam, beta=beta)


# -- noisy formulations ----------------------------------------------------------

def _trivial_noise_ball(problem, rec, formulation):
    """Return the zero decomposition when M itself lies in the noise ball."""
    M = problem.M
    Z = np.zeros_like(M)
    N = np.array(M) if formulation == "N" else None
    rec.record(0, Z, Z, 0.0, 0.0, force=True)
    d = make_decomposition(problem, Z, Z.copy(), N=N, formulation=Formulation.SPCP)
    return d, rec.finish("converged", 0, Lam=np.zeros_like(M))


def solve_admm3_constrained(problem: RpcaProblem, options=None, *, truth=None, sink=None,
                            callback=None):
    """Three-block ADMM (ASALM-style) on ``L + S + N = M, ||N||_F <= sigma``.

    Three-block ADMM has no general convergence guarantee; a run that hits
    ``max_iter`` simply reports status ``"max_iter"`` with its residual history.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho, sigma = problem.M, problem.rho, problem.sigma
    scale = fro_norm(M)
    if scale <= sigma:
        return _trivial_noise_ball(problem, rec, "N")
    beta0 = options.beta0 or default_beta(M)
    L, S, N, Lam = Z, Z.copy(), Z.copy(), Z.copy()
    rec.record(0, L, S, 0.0, scale, force=True)
    status, rank, f = "max_iter", 0, 0.0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0)
        old = (L, S, N)
        L, sv = mat_shrink(M - S - N + Lam / beta, 1.0 / beta, rank_hint=rank,
                           seed=options.seed, full_output=True)
        rank = sv.size
        S = vec_shrink(M - L - N + Lam / beta, rho / beta)
        N = proj_fro_ball(M - L - S + Lam / beta, 0.0, sigma)
        R = L + S + N - M
        Lam_prev, Lam = Lam, Lam - beta * R
        res = fro_norm(R)
        f = float(np.sum(sv)) + rho * l1_norm(S)
        rec.record(k, L, S, f, res)
        rec.notify(k, L=L, S=S, N=N, Lam=Lam, Lam_prev=Lam_prev, beta=beta)
        if stop_test(res, rel_change((L, S, N), old), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, f, fro_norm(L + S + N - M), force=True)
    d = make_decomposition(problem, L, S, N=N, formulation=Formulation.SPCP)
    return d, rec.finish(status, k, Lam=Lam, beta=beta)


def solve_admm3_penalty(problem: RpcaProblem, options=None, *, truth=None, sink=None,
                        callback=None):
    """Three-block ADMM for ``||L||_* + rho ||S||_1 + mu ||N||_F^2, L + S + N = M``."""
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho, mu = problem.M, problem.rho, problem.mu
    beta0 = options.beta0 or default_beta(M)
    scale = fro_norm(M)
    L, S, N, Lam = Z, Z.copy(), Z.copy(), Z.copy()
    rec.record(0, L, S, 0.0, scale, force=True)
    status, rank, f = "max_iter", 0, 0.0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0)
        old = (L, S, N)
        L, sv = mat_shrink(M - S - N + Lam / beta, 1.0 / beta, rank_hint=rank,
                           seed=options.seed, full_output=True)
        rank = sv.size
        S = vec_shrink(M - L - N + Lam / beta, rho / beta)
        N = noise_step(M, L, S, Lam, beta, mu)
        R = L + S + N - M
        Lam_prev, Lam = Lam, Lam - beta * R
        res = fro_norm(R)
        f = float(np.sum(sv)) + rho * l1_norm(S) + mu * fro_norm_sq(N)
        rec.record(k, L, S, f, res)
        rec.notify(k, L=L, S=S, N=N, Lam=Lam, Lam_prev=Lam_prev, beta=beta)
        if stop_test(res, rel_change((L, S, N), old), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, f, fro_norm(L + S + N - M), force=True)
    d = make_decomposition(problem, L, S, N=N, formulation=Formulation.PenaltySPCP3)
    return d, rec.finish(status, k, Lam=Lam, beta=beta)


def noise_step(M, L, S, Lam, beta, mu):
    """Minimiser over N of ``mu ||N||^2 - <Lam, N> + beta/2 ||L + S + N - M||^2``."""
    return (Lam + beta * (M - L - S)) / (2.0 * mu + beta)


ADMIP_GROWTH = 1.0


def admip_beta0(M) -> float:
    """Small starting penalty so early singular value thresholds are large."""
    return 0.2 * default_beta(M)


def solve_admip(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """ADMM with increasing penalty on the split ``L_hat = L, (L, S) in chi``.

    The L_hat-step thresholds singular values (partial SVD, rank-bracketed);
    the (L, S)-step is :func:`joint_prox_chi`.  The schedule
    ``beta0 (1 + c k)`` (default ``c = 1``, ``beta0 = 0.2 mn / (4 ||M||_1)``)
    grows linearly, so ``sum 1/beta_k`` diverges.  The returned
    L is the feasible copy; the low-rank copy is ``trace.info["L_hat"]``.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho, sigma = problem.M, problem.rho, problem.sigma
    scale = fro_norm(M)
    if scale <= sigma:
        return _trivial_noise_ball(problem, rec, None)
    beta0 = options.beta0 or admip_beta0(M)
    L_hat, L, S, Lam = Z, Z.copy(), Z.copy(), Z.copy()
    rec.record(0, L, S, 0.0, scale, force=True)
    status, rank, f = "max_iter", 0, 0.0
    for k in range(1, options.max_iter + 1):
        beta = options.beta(k - 1, beta0, growth=ADMIP_GROWTH)
        old = (L_hat, L, S)
        L_hat, sv = mat_shrink(L + Lam / beta, 1.0 / beta, rank_hint=rank,
                               seed=options.seed, full_output=True)
        rank = sv.size
        L, S = joint_prox_chi(L_hat - Lam / beta, M, sigma, rho / beta)
        R = L_hat - L
        Lam_prev, Lam = Lam, Lam - beta * R
        res = fro_norm(R)
        f = float(np.sum(sv)) + rho * l1_norm(S)
        rec.record(k, L, S, f, fro_norm(L + S - M))
        rec.notify(k, L_hat=L_hat, L=L, S=S, Lam=Lam, Lam_prev=Lam_prev, beta=beta)
        if stop_test(res, rel_change((L_hat, L, S), old), options.tol, scale):
            status = "converged"
            break
    rec.record(k, L, S, f, fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.SPCP)
    return d, rec.finish(status, k, Lam=Lam, beta=beta, L_hat=L_hat)


def solve_pspg(problem: RpcaProblem, options=None, *, truth=None, sink=None, callback=None):
    """Accelerated proximal gradient on ``f_mu(L) + rho ||S||_1`` over
    ``chi = {||L + S - M||_F <= sigma}``, with ``mu = options.mu_smooth``.

    The gradient of the smoothed nuclear norm is ``1/mu``-Lipschitz, so the
    step is ``mu``.  Iterates are feasible at every step.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M, rho, sigma = problem.M, problem.rho, problem.sigma
    mu = options.mu_smooth
    if fro_norm(M) <= sigma:
        return _trivial_noise_ball(problem, rec, None)
    xi = mu
    L, S = Z, Z.copy()
    L_prev = L
    t_prev = t = 1.0
    rec.record(0, L, S, 0.0, fro_norm(M), force=True)
    status = "max_iter"
    for k in range(1, options.max_iter + 1):
        w = (t_prev - 1.0) / t
        Lb = L + w * (L - L_prev)
        _, grad = smoothed_nuclear(Lb, mu)
        L_new, S_new = joint_prox_chi(Lb - xi * grad, M, sigma, xi * rho)
        t_prev, t = t, next_t(t)
        change = rel_change((L_new, S_new), (L, S))
        L_prev, L, S = L, L_new, S_new
        if k % options.trace_every == 0:
            rec.record(k, L, S, nuclear_norm(L) + rho * l1_norm(S), fro_norm(L + S - M))
        rec.notify(k, L=L, S=S)
        if change <= options.tol:
            status = "converged"
            break
    rec.record(k, L, S, nuclear_norm(L) + rho * l1_norm(S), fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.SPCP)
    return d, rec.finish(status, k)


# -- bounded reformulation: Frank-Wolfe with a proximal S-step --------------------

def fw_bounds(problem: RpcaProblem, lambda_L, lambda_S):
    """``U_L = ||M||_F^2 / (2 lambda_L)``, ``U_S = ||M||_F^2 / (2 lambda_S)``."""
    m2 = fro_norm_sq(problem.M)
    return m2 / (2.0 * lambda_L), m2 / (2.0 * lambda_S)


def fw_step_size(k: int) -> float:
    return 2.0 / (k + 2.0)


def solve_frank_wolfe_hybrid(problem: RpcaProblem, options=None, *, truth=None, sink=None,
                             callback=None):
    """Frank-Wolfe on ``1/2 ||L + S - M||^2 + lambda_L t_L + lambda_S t_S``
    with ``||L||_* <= t_L <= U_L`` and ``||S||_1 <= t_S <= U_S``, followed each
    iteration by an exact proximal gradient step on the S block.

    Stops when the Frank-Wolfe duality gap falls below ``tol * max(1, f)``.
    """
    options, rec, Z = _setup(problem, options, truth, sink, callback)
    M = problem.M
    lam_L, lam_S = fw_weights(problem, options.lambda_L, options.lambda_S)
    U_L, U_S = fw_bounds(problem, lam_L, lam_S)
    L, S = Z, Z.copy()
    tL = tS = 0.0

    def fval():
        return 0.5 * fro_norm_sq(L + S - M) + lam_L * tL + lam_S * tS

    rec.record(0, L, S, fval(), fro_norm(M), force=True)
    status, gap = "max_iter", math.inf
    for k in range(options.max_iter):
        G = L + S - M
        if not np.any(G):
            dL, dtL, dS, dtS = np.zeros_like(M), 0.0, np.zeros_like(M), 0.0
        else:
            s1, u, v = top_singular_pair(G, seed=options.seed)
            if s1 > lam_L:
                dL, dtL = -U_L * (u @ v.T), U_L
            else:
                dL, dtL = np.zeros_like(M), 0.0
            idx = int(np.argmax(np.abs(G)))
            i, j = divmod(idx, M.shape[1])
            dS, dtS = np.zeros_like(M), 0.0
            if abs(G[i, j]) > lam_S:
                dS[i, j] = -U_S * np.sign(G[i, j])
                dtS = U_S
        gap = (float(np.sum(G * (L - dL))) + lam_L * (tL - dtL)
               + float(np.sum(G * (S - dS))) + lam_S * (tS - dtS))
        f = fval()
        if gap <= options.tol * max(1.0, f):
            status = "converged"
            break
        gamma = fw_step_size(k)
        L = (1 - gamma) * L + gamma * dL
        tL = min((1 - gamma) * tL + gamma * dtL, U_L)   # rounding may overshoot the cap
        S = (1 - gamma) * S + gamma * dS
        tS = (1 - gamma) * tS + gamma * dtS
        # proximal gradient step on (S, t_S); the S-gradient is 1-Lipschitz
        S = shrink_l1_ball(S - (L + S - M), lam_S, U_S)
        tS = l1_norm(S)
        rec.record(k + 1, L, S, fval(), fro_norm(L + S - M))
        rec.notify(k + 1, L=L, S=S, tL=tL, tS=tS, gamma=gamma, U_L=U_L, U_S=U_S)
    else:
        k = options.max_iter
    rec.record(k, L, S, fval(), fro_norm(L + S - M), force=True)
    d = make_decomposition(problem, L, S, formulation=Formulation.FW)
    return d, rec.finish(status, k, tL=tL, tS=tS, gap=gap, U_L=U_L, U_S=U_S)

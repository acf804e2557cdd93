"""Convex solvers: fixed points, update identities, feasibility and recovery."""

import math

import numpy as np
import pytest

from rpcakit import convex
from rpcakit.base import DivergenceError, SolverOptions
from rpcakit.convex import (fw_step_size, next_t, noise_step, solve_admip, solve_admm2,
                            solve_admm3_constrained, solve_admm3_penalty,
                            solve_alt_linearization, solve_apgm, solve_frank_wolfe_hybrid,
                            solve_ialm, solve_pgm, solve_pspg)
from rpcakit.model import RpcaProblem, relative_error
from rpcakit.synthetic import SyntheticSpec, generate

ALL = [solve_pgm, solve_apgm, solve_ialm, solve_admm2, solve_alt_linearization,
       solve_admm3_constrained, solve_admm3_penalty, solve_admip, solve_pspg,
       solve_frank_wolfe_hybrid]


def instance(n, seed=0, snr=math.inf, c_r=0.05, c_p=0.05):
    return generate(SyntheticSpec(n, c_r, c_p, snr, seed))


def fro(X):
    return float(np.linalg.norm(X))


class Log:
    """Callback that keeps every state dict."""

    def __init__(self):
        self.states = []

    def __call__(self, k, state):
        self.states.append((k, {key: (v.copy() if isinstance(v, np.ndarray) else v)
                                for key, v in state.items()}))


@pytest.mark.parametrize("solver", ALL, ids=lambda f: f.__name__)
def test_zero_data_gives_zero_decomposition(solver):
    d, trace = solver(RpcaProblem(np.zeros((6, 5)), sigma=0.0), SolverOptions(max_iter=50))
    assert not np.any(d.L) and not np.any(d.S)
    assert trace.converged


def test_pgm_zero_data_stops_after_one_iteration():
    _, trace = solve_pgm(RpcaProblem(np.zeros((4, 4))), SolverOptions(max_iter=10))
    assert trace.iterations == 1


def test_nesterov_sequence():
    assert next_t(1.0) == pytest.approx((1 + math.sqrt(5)) / 2, rel=1e-15)
    assert fw_step_size(0) == 1.0


def test_penalty_step_checked():
    P = RpcaProblem(np.eye(3), mu=2.0)
    with pytest.raises(ValueError, match="exceeds"):
        solve_pgm(P, SolverOptions(tau=0.5))


def test_pgm_monotone_and_matches_apgm_reference():
    g = instance(20)
    P = RpcaProblem(g.M, mu=10.0, rho=1 / math.sqrt(20))
    ref, _ = solve_apgm(P, SolverOptions(max_iter=5000, tol=1e-300))
    d, trace = solve_pgm(P, SolverOptions(max_iter=2000, tol=1e-12))
    f = trace.column("objective")
    assert np.all(np.diff(f) <= 1e-9 * np.abs(f[:-1]))
    assert abs(d.objective - ref.objective) <= 1e-4


def test_penalty_rate_slopes_20():
    g = instance(20)
    P = RpcaProblem(g.M, mu=10.0, rho=1 / math.sqrt(20))
    _, ref = solve_apgm(P, SolverOptions(max_iter=10_000, tol=1e-300))
    f_star = ref.column("objective").min()
    slopes = []
    for solver in (solve_pgm, solve_apgm):
        _, trace = solver(P, SolverOptions(max_iter=200, tol=1e-300))
        it, gap = trace.column("iter"), trace.column("objective") - f_star
        sel = it >= 10
        assert np.all(gap[sel] > 0)
        slopes.append(np.polyfit(np.log(it[sel]), np.log(gap[sel]), 1)[0])
    assert slopes[0] <= -0.8 and slopes[1] <= -1.6


def test_pgm_divergence_detected(monkeypatch):
    # an overlong step makes the objective grow; the guard must fire
    monkeypatch.setattr(convex, "_penalty_step", lambda problem, options: 3.0 / problem.mu)
    g = instance(20)
    with pytest.raises(DivergenceError):
        solve_pgm(RpcaProblem(g.M, mu=10.0), SolverOptions(max_iter=200))


def test_apgm_momentum_sequence():
    g = instance(20)
    log = Log()
    solve_apgm(RpcaProblem(g.M, mu=10.0), SolverOptions(max_iter=5), callback=log)
    t = 1.0
    for _, s in log.states:
        t = next_t(t)
        assert s["t"] == t


# -- equality-constrained solvers -----------------------------------------------------

def test_ialm_recovery_and_multiplier_identity():
    g = instance(50)
    log = Log()
    d, trace = solve_ialm(RpcaProblem(g.M), SolverOptions(max_iter=500), callback=log)
    assert trace.converged
    assert relative_error(d, g.L0, g.S0) <= 1e-3
    for _, s in log.states:
        assert np.array_equal(s["Lam"], s["Lam_prev"] - s["beta"] * (s["L"] + s["S"] - g.M))


def test_admm2_recovery_and_residual():
    g = instance(50)
    d, trace = solve_admm2(RpcaProblem(g.M, rho=1 / math.sqrt(50)),
                           SolverOptions(max_iter=500, tol=1e-8))
    assert trace.converged and trace.iterations <= 500
    assert relative_error(d, g.L0, g.S0) <= 1e-3
    assert fro(d.L + d.S - g.M) <= 1e-6


def test_admm2_steps_are_the_two_shrinkages():
    g = instance(30, seed=3)
    log = Log()
    P = RpcaProblem(g.M)
    solve_admm2(P, SolverOptions(max_iter=4), callback=log)
    from rpcakit.prox import mat_shrink, vec_shrink
    Lam, S = np.zeros_like(g.M), np.zeros_like(g.M)
    for _, s in log.states:
        beta = s["beta"]
        L = mat_shrink(g.M - S + Lam / beta, 1 / beta)
        np.testing.assert_allclose(s["L"], L, atol=1e-10)
        S = vec_shrink(g.M - s["L"] + Lam / beta, P.rho / beta)
        np.testing.assert_array_equal(s["S"], S)
        Lam = s["Lam"]


def test_alt_linearization_half_step_and_admm2_limit():
    g = instance(30, c_r=0.1)
    P = RpcaProblem(g.M)
    log = Log()
    d, _ = solve_alt_linearization(P, SolverOptions(max_iter=500, nu=1e-6), callback=log)
    for _, s in log.states:
        assert np.array_equal(s["Lam_half"],
                              s["Lam_prev"] - s["beta"] * (s["L"] + s["S_prev"] - g.M))
        assert np.array_equal(s["Lam"], s["Lam_half"] - s["beta"] * (s["L"] + s["S"] - g.M))
    ref, _ = solve_admm2(P, SolverOptions(max_iter=500))
    assert fro(d.L - ref.L) <= 1e-2 * fro(ref.L)
    assert fro(d.S - ref.S) <= 1e-2 * fro(ref.S)


def test_cross_solver_objective_agreement():
    g = instance(30, c_r=0.1)
    P = RpcaProblem(g.M)
    opts = SolverOptions(max_iter=500)
    f = [s(P, opts)[0].objective
         for s in (solve_admm2, solve_ialm, solve_alt_linearization)]
    for a in f:
        for b in f:
            assert abs(a - b) <= 1e-3 * abs(b)


# -- noisy formulations -------------------------------------------------------------

def test_admm3_constrained_noise_ball_absorbs_everything():
    M = np.random.default_rng(0).standard_normal((5, 5))
    d, trace = solve_admm3_constrained(RpcaProblem(M, sigma=fro(M) * 1.01))
    assert not np.any(d.L) and not np.any(d.S)
    np.testing.assert_array_equal(d.N, M)
    assert d.objective == 0.0 and trace.converged


def test_admm3_constrained_recovery_and_ball():
    g = instance(50, snr=50.0)
    log = Log()
    d, _ = solve_admm3_constrained(RpcaProblem(g.M, sigma=g.sigma),
                                   SolverOptions(max_iter=500), callback=log)
    assert relative_error(d, g.L0, g.S0) <= 5e-2
    for _, s in log.states:
        assert fro(s["N"]) <= g.sigma + 1e-10
        assert np.array_equal(s["Lam"], s["Lam_prev"]
                              - s["beta"] * (s["L"] + s["S"] + s["N"] - g.M))


def test_noise_step_zero_gradient():
    rng = np.random.default_rng(1)
    M, L, S, Lam = (rng.standard_normal((4, 3)) for _ in range(4))
    beta, mu = 0.7, 1.9
    N = noise_step(M, L, S, Lam, beta, mu)

    def lagr(N):
        R = L + S + N - M
        return mu * np.sum(N * N) - np.sum(Lam * N) + beta / 2 * np.sum(R * R)

    from oracles import central_fd_gradient
    assert np.abs(central_fd_gradient(lagr, N)).max() <= 1e-6


def test_admm3_penalty_noisy_residual():
    g = instance(50, snr=50.0)
    d, trace = solve_admm3_penalty(RpcaProblem(g.M, mu=1.0), SolverOptions(max_iter=2000, tol=1e-8))
    assert trace.converged
    assert fro(d.L + d.S + d.N - g.M) <= 1e-6


def test_admip_schedule():
    assert SolverOptions(beta_growth=0.5).beta(2, 1.0) == 2.0
    log = Log()
    g = instance(20, snr=40.0)
    solve_admip(RpcaProblem(g.M, sigma=g.sigma), SolverOptions(max_iter=4, beta0=1.0,
                beta_growth=0.5), callback=log)
    assert [s["beta"] for _, s in log.states] == [1.0, 1.5, 2.0, 2.5]


def test_admip_trivial_ball():
    M = np.random.default_rng(2).standard_normal((4, 6))
    d, _ = solve_admip(RpcaProblem(M, sigma=fro(M)))
    assert not np.any(d.L) and not np.any(d.S)


def test_admip_feasible_and_multiplier():
    g = instance(30, snr=40.0, seed=4)
    log = Log()
    solve_admip(RpcaProblem(g.M, sigma=g.sigma), SolverOptions(max_iter=60), callback=log)
    for _, s in log.states:
        assert fro(s["L"] + s["S"] - g.M) <= g.sigma + 1e-10
        assert np.array_equal(s["Lam"], s["Lam_prev"] - s["beta"] * (s["L_hat"] - s["L"]))


@pytest.mark.slow
def test_admip_beats_admm3_on_100():
    g = instance(100, snr=100.0)
    P = RpcaProblem(g.M, sigma=g.sigma)
    opts = SolverOptions(max_iter=1000, tol=1e-4)
    d, t_admip = solve_admip(P, opts)
    _, t_admm3 = solve_admm3_constrained(P, opts)
    assert relative_error(d, g.L0, g.S0) <= 1e-2
    assert t_admip.converged and t_admip.iterations < t_admm3.iterations


def test_pspg_feasible_and_within_smoothing_gap():
    g = instance(50, snr=50.0)
    P = RpcaProblem(g.M, sigma=g.sigma)
    log = Log()
    mu = 1e-2
    d, _ = solve_pspg(P, SolverOptions(max_iter=3000, tol=1e-9, mu_smooth=mu), callback=log)
    for _, s in log.states:
        assert fro(s["L"] + s["S"] - g.M) <= g.sigma + 1e-10
    ref, _ = solve_admip(P, SolverOptions(max_iter=3000, tol=1e-8))
    assert abs(d.objective - ref.objective) <= 2 * (mu / 2) * 50


def test_frank_wolfe_feasibility_every_iteration():
    g = instance(15, snr=30.0, c_r=0.1)
    log = Log()
    d, trace = solve_frank_wolfe_hybrid(RpcaProblem(g.M, mu=5.0), SolverOptions(max_iter=60),
                                        callback=log)
    assert log.states[0][1]["gamma"] == 1.0
    ulp = 1 + 1e-12          # slack for rounding only
    for _, s in log.states:
        nuc = np.sum(np.linalg.svd(s["L"], compute_uv=False))
        assert nuc <= s["tL"] * ulp + 1e-12 and s["tL"] <= s["U_L"] * ulp
        assert np.sum(np.abs(s["S"])) <= s["tS"] * ulp + 1e-12 and s["tS"] <= s["U_S"] * ulp


def test_frank_wolfe_rate_bound_and_gap_certificate():
    g = instance(15, snr=30.0, c_r=0.1)
    P = RpcaProblem(g.M, mu=5.0)
    d, trace = solve_frank_wolfe_hybrid(P, SolverOptions(max_iter=300))
    U_L, U_S = trace.info["U_L"], trace.info["U_S"]
    # penalty optimum rescaled by 1/mu is the bounded model's optimum
    ref, _ = solve_apgm(P, SolverOptions(max_iter=5000, tol=1e-300))
    f_star = ref.objective / P.mu
    f = trace.column("objective")
    k = np.arange(len(f))
    curvature = 2.0 * ((2 * U_L) ** 2 + (2 * U_S) ** 2)
    assert np.all(f[1:] - f_star <= 2 * curvature / (k[1:] + 2))
    assert f[-1] < f[1]
    # duality gap of the final iterate, recomputed with a dense SVD
    lam_L, lam_S = 1 / P.mu, P.rho / P.mu
    G = d.L + d.S - g.M
    s1 = np.linalg.norm(G, 2)
    gap = (np.sum(G * d.L) + lam_L * trace.info["tL"] - min(0.0, U_L * (lam_L - s1))
           + np.sum(G * d.S) + lam_S * trace.info["tS"] - min(0.0, U_S * (lam_S - np.abs(G).max())))
    assert 0 <= d.objective - f_star <= gap * (1 + 1e-9)

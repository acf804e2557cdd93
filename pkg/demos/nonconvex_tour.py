"""Factored and rank-capped models, and their stationarity certificates.

Run:  python demos/nonconvex_tour.py
"""

import numpy as np

from rpcakit import RpcaProblem, SolverOptions, relative_error
from rpcakit.nonconvex import (eps_stationarity_kkt, solve_admm_g, solve_factored_gd,
                               solve_gen_cond_grad, solve_godec, solve_lmafit, solve_prox_bcd)
from rpcakit.synthetic import SyntheticSpec, generate

inst = generate(SyntheticSpec(120, 0.05, 0.05, seed=0))
r, s = inst.spec.rank, inst.spec.support_size

# These models need the rank (and GoDec the support size) up front.
problem = RpcaProblem(inst.M, rank_cap=r, sparsity_cap=s)
print("recovery with true caps, 120 x 120, noiseless")
for name, solver, opts in [
        ("godec", solve_godec, SolverOptions(max_iter=200, tol=1e-9)),
        ("lmafit", solve_lmafit, SolverOptions(max_iter=500, tol=1e-9)),
        ("factored_gd", solve_factored_gd, SolverOptions(max_iter=1000, tol=1e-10))]:
    d, trace = solver(problem, opts)
    print(f"  {name:<12} error {relative_error(d, inst.L0, inst.S0):.1e} "
          f"after {trace.iterations} iterations")

# The caps matter.  With three spare columns LMafit has room to absorb part
# of the sparse corruption into L, and recovery fails.
d, _ = solve_lmafit(RpcaProblem(inst.M, rank_cap=r + 3), SolverOptions(max_iter=500, tol=1e-9))
print(f"  lmafit r+3    error {relative_error(d, inst.L0, inst.S0):.1e}, "
      f"numerical rank {np.linalg.matrix_rank(d.L, tol=1e-6)}")

# The conditional-gradient and ADMM-g methods come with certificates instead
# of recovery guarantees.  A smaller instance keeps this quick.
small = generate(SyntheticSpec(30, 0.1, 0.05, seed=0))
print("\nstationarity on 30 x 30")
p_cg = RpcaProblem(small.M, rank_cap=small.spec.rank, rho1=1.0)
_, trace = solve_gen_cond_grad(p_cg, SolverOptions(max_iter=400, tol=1e-300))
it, eps = trace.column("iter"), trace.column("stationarity")
for k in (1, 10, 100, 400):
    print(f"  conditional gradient  k={k:<4d} eps = {eps[it == k][0]:.3g}")

p_g = RpcaProblem(small.M, rank_cap=small.spec.rank, rho=0.1, rho1=0.1, rho3=1.0)
d, trace = solve_admm_g(p_g, SolverOptions(max_iter=3000, tol=1e-5))
print(f"  ADMM-g stopped after {trace.iterations} iterations, "
      f"KKT measure {eps_stationarity_kkt(trace.info['state'], p_g):.2e}")

# Proximal BCD decreases its objective by a fixed multiple of the step every sweep.
d, trace = solve_prox_bcd(RpcaProblem(small.M, rank_cap=small.spec.rank, rho=0.005, rho1=0.01,
                                      rho3=10.0), SolverOptions(max_iter=500))
f = trace.column("objective")
monotone = bool(np.all(np.diff(f[1:]) <= 0))
print(f"  prox BCD objective {f[1]:.4g} -> {f[-1]:.4g}, monotone: {monotone}, "
      f"error {relative_error(d, small.L0, small.S0):.1e}")

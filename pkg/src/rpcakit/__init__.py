"""Robust PCA solvers: convex and factored decompositions of a matrix into
low-rank, sparse and dense-noise parts."""

from .base import DivergenceError, SolverOptions
from .convex import (solve_admip, solve_admm2, solve_admm3_constrained, solve_admm3_penalty,
                     solve_alt_linearization, solve_apgm, solve_frank_wolfe_hybrid, solve_ialm,
                     solve_pgm, solve_pspg)
from .model import (Decomposition, Formulation, ObservationMask, RpcaProblem, Trace, TraceRecord,
                    objective, proj_omega, relative_error)
from .nonconvex import (FactoredState, eps_stationarity_cg, eps_stationarity_kkt, solve_admm_g,
                        solve_factored_gd, solve_gen_cond_grad, solve_godec, solve_lmafit,
                        solve_prox_bcd)
from .registry import SOLVERS, get_solver
from .synthetic import SyntheticInstance, SyntheticSpec, generate, snr_to_varrho

__all__ = [
    "DivergenceError", "SolverOptions", "Decomposition", "Formulation", "ObservationMask",
    "RpcaProblem", "Trace", "TraceRecord", "objective", "proj_omega", "relative_error",
    "FactoredState", "eps_stationarity_cg", "eps_stationarity_kkt", "SOLVERS", "get_solver",
    "SyntheticInstance", "SyntheticSpec", "generate", "snr_to_varrho",
    "solve_admip", "solve_admm2", "solve_admm3_constrained", "solve_admm3_penalty",
    "solve_alt_linearization", "solve_apgm", "solve_frank_wolfe_hybrid", "solve_ialm",
    "solve_pgm", "solve_pspg", "solve_admm_g", "solve_factored_gd", "solve_gen_cond_grad",
    "solve_godec", "solve_lmafit", "solve_prox_bcd",
]

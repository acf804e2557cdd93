"""Solver ids used by the benchmark harness and the command line."""

from __future__ import annotations

from . import convex, nonconvex

SOLVERS = {
    "pgm": convex.solve_pgm,
    "apgm": convex.solve_apgm,
    "ialm": convex.solve_ialm,
    "admm2": convex.solve_admm2,
    "alt_linearization": convex.solve_alt_linearization,
    "admm3_constrained": convex.solve_admm3_constrained,
    "admm3_penalty": convex.solve_admm3_penalty,
    "admip": convex.solve_admip,
    "pspg": convex.solve_pspg,
    "frank_wolfe_hybrid": convex.solve_frank_wolfe_hybrid,
    "godec": nonconvex.solve_godec,
    "lmafit": nonconvex.solve_lmafit,
    "factored_gd": nonconvex.solve_factored_gd,
    "gen_cond_grad": nonconvex.solve_gen_cond_grad,
    "admm_g": nonconvex.solve_admm_g,
    "prox_bcd": nonconvex.solve_prox_bcd,
}


class UnknownSolverError(KeyError):
    def __str__(self):
        return f"unknown solver {self.args[0]!r}; available: {', '.join(sorted(SOLVERS))}"


def get_solver(name: str):
    try:
        return SOLVERS[name]
    except KeyError:
        raise UnknownSolverError(name) from None

"""Solver options, trace recording and the shared stopping rule."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .model import Decomposition, Trace, TraceRecord, fro_norm, l1_norm, relative_error


class DivergenceError(RuntimeError):
    """Objective rose on consecutive iterations of a monotone method."""


@dataclass(frozen=True)
class SolverOptions:
    """Hyperparameters shared by all solvers.

    ``None`` for `tau`, `beta0`, `beta_growth`, `eta`, `lambda_L` or
    `lambda_S` selects the solver's default.  The penalty schedule is
    ``beta_k = min(beta0 * (1 + beta_growth * k), beta_max)``.

    ``clock="virtual"`` replaces wall time in traces by the iteration count,
    which makes trace files byte-reproducible.
    """

    max_iter: int = 500
    tol: float = 1e-7
    tau: Optional[float] = None
    beta0: Optional[float] = None
    beta_growth: Optional[float] = None
    beta_max: float = math.inf
    inner_iter: int = 10
    nu: float = 1e-6
    mu_smooth: float = 1e-3
    lambda_L: Optional[float] = None
    lambda_S: Optional[float] = None
    seed: int = 0
    trace_every: int = 1
    prox_weight: float = 1.0
    eta: Optional[float] = None
    corruption: float = 0.1
    clock: str = "wall"

    def __post_init__(self):
        if self.max_iter < 1 or self.inner_iter < 1 or self.trace_every < 1:
            raise ValueError("max_iter, inner_iter and trace_every must be positive")
        for name in ("tol", "nu", "mu_smooth", "beta_max", "prox_weight"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("tau", "beta0", "eta", "lambda_L", "lambda_S"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.beta_growth is not None and self.beta_growth < 0:
            raise ValueError("beta_growth must be nonnegative")
        if not 0 < self.corruption < 1:
            raise ValueError("corruption must lie in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.clock not in ("wall", "virtual"):
            raise ValueError("clock must be 'wall' or 'virtual'")

    @classmethod
    def from_dict(cls, d: dict) -> "SolverOptions":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def beta(self, k: int, beta0: float, growth: float = 0.0) -> float:
        """Penalty at iteration `k`; `growth` is the solver's default rate."""
        c = growth if self.beta_growth is None else self.beta_growth
        return min(beta0 * (1.0 + c * k), self.beta_max)


def default_beta(M) -> float:
    """``mn / (4 ||M||_1)``, or 1 for the zero matrix."""
    a = l1_norm(M)
    return M.size / (4.0 * a) if a > 0 else 1.0


def rel_change(new, old) -> float:
    """``||new - old|| / max(1, ||old||)`` over a tuple of blocks."""
    num = math.sqrt(sum(fro_norm(a - b) ** 2 for a, b in zip(new, old)))
    den = math.sqrt(sum(fro_norm(b) ** 2 for b in old))
    return num / max(1.0, den)


class Recorder:
    """Collects :class:`TraceRecord` rows for one run.

    `truth` is an optional ``(L0, S0)`` pair for the relative error column;
    `sink` receives each record as it is produced; `callback` receives
    ``(k, state)`` after every iteration, where `state` is a dict of the
    solver's current blocks (used by tests to audit multiplier updates).
    """

    def __init__(self, options: SolverOptions, truth=None, sink=None, callback=None):
        self.options = options
        self.truth = truth
        self.sink = sink
        self.callback = callback
        self.trace = Trace()
        self._t0 = time.perf_counter()

    def elapsed(self, k) -> float:
        if self.options.clock == "virtual":
            return float(k)
        return time.perf_counter() - self._t0

    def record(self, k, L, S, objective, primal_residual, stationarity=None, force=False):
        if not force and k % self.options.trace_every:
            return
        if self.trace.records and self.trace.records[-1].iter == k:
            return
        rel = None
        if self.truth is not None:
            rel = relative_error(Decomposition(L, S), *self.truth)
        rec = TraceRecord(int(k), self.elapsed(k), float(objective), float(primal_residual),
                          rel, None if stationarity is None else float(stationarity))
        self.trace.records.append(rec)
        if self.sink is not None:
            self.sink(rec)

    def notify(self, k, **state):
        if self.callback is not None:
            self.callback(k, state)

    def finish(self, status, iterations, **info) -> Trace:
        self.trace.status = status
        self.trace.iterations = int(iterations)
        self.trace.info.update(info)
        return self.trace


def stop_test(primal_res, change, tol, scale) -> bool:
    return primal_res <= tol * max(1.0, scale) and change <= tol


def zeros_like_problem(problem):
    return np.zeros(problem.shape)

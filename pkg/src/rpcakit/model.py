"""Domain types, formulation objectives and the ground-truth error metric.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 and shape
``(m, n)``; :func:`as_matrix` is the single validation point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class Formulation(str, enum.Enum):
    """Objective families a :class:`Decomposition` can be scored against."""

    RPCP = "RPCP"                  # ||L||_* + rho ||S||_1,  L + S = M
    SPCP = "SPCP"                  # ||L||_* + rho ||S||_1,  ||L + S - M||_F <= sigma
    PenaltySPCP = "PenaltySPCP"    # ||L||_* + rho ||S||_1 + mu/2 ||L + S - M||_F^2
    PenaltySPCP3 = "PenaltySPCP3"  # ||L||_* + rho ||S||_1 + mu ||N||_F^2,  L + S + N = M
    Factored = "Factored"          # 1/2 ||UV' + S (+N) - M||^2 + rho1/2 (|U|^2+|V|^2) + rho ||S||_1 (+ rho3 ||N||^2)
    FW = "FW"                      # 1/2 ||L + S - M||^2 + lambda_L t_L + lambda_S t_S


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Return `x` as a finite 2-D float64 array, raising ``ValueError`` otherwise."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


# Norms.  Sums are taken over a flattened copy so numpy's pairwise summation
# applies to the whole array, not row by row.

def l1_norm(Z: np.ndarray) -> float:
    return float(np.sum(np.abs(Z).ravel()))


def fro_norm_sq(Z: np.ndarray) -> float:
    z = np.asarray(Z).ravel()
    return float(np.sum(z * z))


def fro_norm(Z: np.ndarray) -> float:
    return float(np.sqrt(fro_norm_sq(Z)))


def nuclear_norm(Z: np.ndarray) -> float:
    """Sum of singular values from a full dense SVD."""
    return float(np.sum(np.linalg.svd(Z, compute_uv=False)))


@dataclass(frozen=True)
class ObservationMask:
    """Sorted, duplicate-free set of observed ``(row, col)`` indices (0-based)."""

    shape: tuple
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        m, n = self.shape
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have the same length")
        if rows.size and (rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n):
            raise ValueError(f"mask index out of bounds for shape {self.shape}")
        lin = np.unique(rows * n + cols)
        if lin.size != rows.size:
            raise ValueError("mask contains duplicate indices")
        object.__setattr__(self, "shape", (int(m), int(n)))
        object.__setattr__(self, "rows", lin // n)
        object.__setattr__(self, "cols", lin % n)

    @classmethod
    def from_pairs(cls, pairs, shape) -> "ObservationMask":
        pairs = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(tuple(shape), pairs[:, 0], pairs[:, 1])

    @classmethod
    def from_linear(cls, linear, shape) -> "ObservationMask":
        linear = np.asarray(linear, dtype=np.int64)
        return cls(tuple(shape), linear // shape[1], linear % shape[1])

    @classmethod
    def full(cls, shape) -> "ObservationMask":
        return cls.from_linear(np.arange(shape[0] * shape[1]), shape)

    def __len__(self):
        return int(self.rows.size)

    def linear(self) -> np.ndarray:
        return self.rows * self.shape[1] + self.cols

    def to_bool(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=bool)
        out[self.rows, self.cols] = True
        return out


def proj_omega(Z, mask: ObservationMask) -> np.ndarray:
    """Keep the entries of `Z` indexed by `mask` and zero the rest."""
    Z = as_matrix(Z, "Z")
    if Z.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} does not match matrix shape {Z.shape}")
    out = np.zeros_like(Z)
    out[mask.rows, mask.cols] = Z[mask.rows, mask.cols]
    return out


def default_rho(shape) -> float:
    return 1.0 / np.sqrt(max(shape))


@dataclass(frozen=True)
class RpcaProblem:
    """Data matrix plus the model parameters of every supported formulation.

    ``rho`` is the sparsity weight (it plays the role of rho_2 in the
    factored models); ``rho1`` weighs the factor norms and ``rho3`` the noise
    block of the factored models.  ``rho=None`` selects ``1/sqrt(max(m, n))``.
    """

    M: np.ndarray
    rho: Optional[float] = None
    sigma: float = 0.0
    mu: float = 1.0
    rank_cap: int = 0
    sparsity_cap: int = 0
    mask: Optional[ObservationMask] = None
    rho1: float = 1.0
    rho3: float = 1.0

    def __post_init__(self):
        M = as_matrix(self.M, "M")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)
        m, n = M.shape
        if self.rho is None:
            object.__setattr__(self, "rho", default_rho(M.shape))
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative")
        if not (self.rho1 > 0 and self.rho3 > 0):
            raise ValueError("rho1 and rho3 must be positive")
        if not 0 <= self.rank_cap <= min(m, n):
            raise ValueError(f"rank_cap must lie in [0, {min(m, n)}]")
        if not 0 <= self.sparsity_cap <= m * n:
            raise ValueError(f"sparsity_cap must lie in [0, {m * n}]")
        if self.mask is not None and self.mask.shape != M.shape:
            raise ValueError("mask shape does not match M")

    @property
    def shape(self):
        return self.M.shape


@dataclass
class Decomposition:
    """A candidate solution ``(L, S[, N])`` with its objective and residual.

    ``U``/``V`` are kept for factored solvers so the factored objective can be
    evaluated on the factors themselves.
    """

    L: np.ndarray
    S: np.ndarray
    N: Optional[np.ndarray] = None
    objective: float = float("nan")
    primal_residual: float = float("nan")
    U: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None


def residual(M, L, S, N=None) -> np.ndarray:
    if N is None:
        return L + S - M
    return L + S + N - M


def fw_weights(problem: RpcaProblem, lambda_L=None, lambda_S=None):
    """Weights of the bounded Frank-Wolfe model; defaults rescale the penalty model by 1/mu."""
    lam_L = 1.0 / problem.mu if lambda_L is None else float(lambda_L)
    lam_S = problem.rho / problem.mu if lambda_S is None else float(lambda_S)
    return lam_L, lam_S


def objective(problem: RpcaProblem, d: Decomposition, formulation) -> float:
    """Exact objective of `d` under `formulation` (constraints are not checked)."""
    formulation = Formulation(formulation)
    M, L, S, N = problem.M, d.L, d.S, d.N
    rho = problem.rho
    if formulation in (Formulation.RPCP, Formulation.SPCP):
        return nuclear_norm(L) + rho * l1_norm(S)
    if formulation is Formulation.PenaltySPCP:
        return nuclear_norm(L) + rho * l1_norm(S) + 0.5 * problem.mu * fro_norm_sq(L + S - M)
    if formulation is Formulation.PenaltySPCP3:
        if N is None:
            raise ValueError("PenaltySPCP3 objective requires the noise block N")
        return nuclear_norm(L) + rho * l1_norm(S) + problem.mu * fro_norm_sq(N)
    if formulation is Formulation.FW:
        lam_L, lam_S = fw_weights(problem)
        return 0.5 * fro_norm_sq(L + S - M) + lam_L * nuclear_norm(L) + lam_S * l1_norm(S)
    # Factored: without factors, the infimum over UV' = L equals rho1 ||L||_*.
    if d.U is not None and d.V is not None:
        Lf = d.U @ d.V.T
        reg = 0.5 * problem.rho1 * (fro_norm_sq(d.U) + fro_norm_sq(d.V))
    else:
        Lf = L
        reg = problem.rho1 * nuclear_norm(L)
    value = reg + rho * l1_norm(S)
    if N is None:
        return value + 0.5 * fro_norm_sq(Lf + S - M)
    return value + 0.5 * fro_norm_sq(Lf + S + N - M) + problem.rho3 * fro_norm_sq(N)


def make_decomposition(problem: RpcaProblem, L, S, N=None, formulation=Formulation.RPCP,
                       U=None, V=None) -> Decomposition:
    d = Decomposition(L=L, S=S, N=N, U=U, V=V)
    for X in (L, S) + ((N,) if N is not None else ()):
        if X.shape != problem.shape:
            raise ValueError(f"component shape {X.shape} does not match M {problem.shape}")
    d.primal_residual = fro_norm(residual(problem.M, L, S, N))
    d.objective = objective(problem, d, formulation)
    return d


def relative_error(d: Decomposition, L0, S0) -> float:
    """``||L - L0||_F / ||L0||_F + ||S - S0||_F / ||S0||_F``."""
    L0 = np.asarray(L0, dtype=np.float64)
    S0 = np.asarray(S0, dtype=np.float64)
    if d.L.shape != L0.shape or d.S.shape != S0.shape:
        raise ValueError("shape mismatch between decomposition and ground truth")
    nL, nS = fro_norm(L0), fro_norm(S0)
    if nL == 0 or nS == 0:
        raise ValueError("ground-truth components must have nonzero Frobenius norm")
    return fro_norm(d.L - L0) / nL + fro_norm(d.S - S0) / nS


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    elapsed_seconds: float
    objective: float
    primal_residual: float
    rel_error: Optional[float] = None
    stationarity: Optional[float] = None


@dataclass
class Trace:
    """Per-iteration telemetry of one solver run plus its exit status.

    `status` is ``"converged"``, ``"max_iter"`` or ``"failed"``; `info` carries
    solver-specific extras (final multiplier, penalty, restarts, ...).
    """

    records: list = field(default_factory=list)
    status: str = "max_iter"
    iterations: int = 0
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.records], dtype=float)

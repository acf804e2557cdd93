"""Synthetic low-rank + sparse + noise instances.

Sampling uses ``numpy.random.default_rng(seed)`` (PCG64 bit generator;
normals by the ziggurat method) and draws in a fixed order: U, V, the support
Omega, the sparse values, the noise.  Identical seeds give bitwise-identical
instances on any machine with the same numpy version.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .io import save_matrix
from .model import ObservationMask, fro_norm_sq


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    c_r: float
    c_p: float
    snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0 < self.c_r < 1:
            raise ValueError("c_r must lie in (0, 1)")
        if not 0 < self.c_p < 1:
            raise ValueError("c_p must lie in (0, 1)")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError("snr_db must be a real number or +inf")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.rank < 1:
            raise ValueError(f"c_r too small: round(c_r * n) = {self.rank}")

    @property
    def rank(self) -> int:
        return int(round(self.c_r * self.n))

    @property
    def support_size(self) -> int:
        return int(round(self.c_p * self.n * self.n))

    @property
    def sparse_bound(self) -> float:
        """Half-width ``sqrt(8 r / pi)`` of the uniform law of the sparse entries."""
        return math.sqrt(8.0 * self.rank / math.pi)

    def with_seed(self, seed: int) -> "SyntheticSpec":
        return SyntheticSpec(self.n, self.c_r, self.c_p, self.snr_db, seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_db"] = "inf" if math.isinf(self.snr_db) else self.snr_db
        return d


def snr_to_varrho(spec: SyntheticSpec) -> float:
    """Noise level whose SNR against the expected signal power is ``spec.snr_db``.

    The expected per-entry power of ``L0 + S0`` is ``c_r n + c_p 8r / (3 pi)``.
    """
    if math.isinf(spec.snr_db):
        if spec.snr_db > 0:
            return 0.0
        raise ValueError("snr_db must be finite or +inf")
    power = spec.c_r * spec.n + spec.c_p * 8.0 * spec.rank / (3.0 * math.pi)
    return math.sqrt(power / 10.0 ** (spec.snr_db / 10.0))


@dataclass(frozen=True)
class SyntheticInstance:
    spec: SyntheticSpec
    M: np.ndarray
    L0: np.ndarray
    S0: np.ndarray
    N0: np.ndarray
    omega: ObservationMask
    varrho: float

    @property
    def sigma(self) -> float:
        """Noise-ball radius matched to the noise level: ``varrho * n``."""
        return self.varrho * math.sqrt(self.M.size)

    def empirical_snr(self) -> float:
        noise = fro_norm_sq(self.N0)
        if noise == 0:
            return math.inf
        return 10.0 * math.log10(fro_norm_sq(self.L0 + self.S0) / noise)

    def incoherence(self) -> float:
        """Largest squared row norm of the singular bases of L0, scaled by ``n / r``.

        Equals 1 for perfectly spread subspaces and ``n / r`` at worst.
        """
        r = self.spec.rank
        U, _, Vt = np.linalg.svd(self.L0, full_matrices=False)
        U, V = U[:, :r], Vt[:r].T
        mu_u = np.max(np.sum(U * U, axis=1)) * U.shape[0] / r
        mu_v = np.max(np.sum(V * V, axis=1)) * V.shape[0] / r
        return float(max(mu_u, mu_v))

    def sidecar(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "rank": self.spec.rank,
            "support_size": len(self.omega),
            "varrho": self.varrho,
            "sigma": self.sigma,
            "incoherence": self.incoherence(),
            "empirical_snr_db": _json_float(self.empirical_snr()),
        }

    def dump(self, directory) -> list:
        """Write M, L0, S0, N0 (binary), omega.csv and instance.json into `directory`."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = [save_matrix(out / f"{name}.bin", getattr(self, name))
                 for name in ("M", "L0", "S0", "N0")]
        omega_path = out / "omega.csv"
        with open(omega_path, "w") as fh:
            for i, j in zip(self.omega.rows, self.omega.cols):
                fh.write(f"{i},{j}\n")
        side = out / "instance.json"
        side.write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
        return paths + [omega_path, side]


def _json_float(x):
    return "inf" if math.isinf(x) else x


def generate(spec: SyntheticSpec) -> SyntheticInstance:
    n, r = spec.n, spec.rank
    rng = np.random.default_rng(spec.seed)
    U = rng.standard_normal((n, r))
    V = rng.standard_normal((n, r))
    L0 = U @ V.T
    lin = rng.choice(n * n, size=spec.support_size, replace=False)
    omega = ObservationMask.from_linear(lin, (n, n))
    b = spec.sparse_bound
    S0 = np.zeros((n, n))
    # values are drawn in the sorted order of omega so the mask alone fixes them
    S0[omega.rows, omega.cols] = rng.uniform(-b, b, size=len(omega))
    varrho = snr_to_varrho(spec)
    if varrho > 0:
        N0 = varrho * rng.standard_normal((n, n))
    else:
        N0 = np.zeros((n, n))
    M = L0 + S0 + N0
    return SyntheticInstance(spec, M, L0, S0, N0, omega, varrho)

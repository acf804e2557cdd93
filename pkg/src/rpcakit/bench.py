"""Benchmark harness: relative-error-versus-time traces averaged over
replications of synthetic instances.

Replication ``i`` of a spec uses seed ``spec.seed + i``.  Every (spec,
solver) cell is interpolated onto one time grid per spec, shared by all
solvers of that spec.  Beyond the end of a trace the last value is held.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .base import SolverOptions
from .io import write_trace_csv
from .model import RpcaProblem
from .registry import get_solver
from .synthetic import SyntheticSpec, generate

AGGREGATE_COLUMNS = ("spec_id", "solver", "grid_time_seconds", "mean_rel_error",
                     "min_rel_error", "max_rel_error")
FAILURE_COLUMNS = ("spec_id", "solver", "replication", "seed", "error")


@dataclass(frozen=True)
class SolverConfig:
    """A solver id plus its options and problem-parameter overrides.

    By default the problem takes its oracle parameters from the instance:
    ``sigma`` from the noise level, ``rank_cap`` and ``sparsity_cap`` from
    the true rank and support size.  `problem` overrides any
    :class:`RpcaProblem` field except ``M``.
    """

    solver: str
    options: SolverOptions = field(default_factory=SolverOptions)
    problem: dict = field(default_factory=dict)
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label or self.solver


def build_problem(instance, overrides=None) -> RpcaProblem:
    params = {"sigma": instance.sigma, "rank_cap": instance.spec.rank,
              "sparsity_cap": instance.spec.support_size}
    params.update(overrides or {})
    return RpcaProblem(instance.M, **params)


@dataclass
class CellRun:
    spec_id: str
    solver: str
    replication: int
    seed: int
    records: list = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class AggregateSeries:
    spec_id: str
    solver: str
    grid: np.ndarray
    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray
    replications: int


@dataclass
class BenchmarkResult:
    series: list
    runs: list

    @property
    def failures(self) -> list:
        return [r for r in self.runs if r.error is not None]


def _run_cell(args):
    spec_id, spec, cfg, rep = args
    seed = spec.seed + rep
    run = CellRun(spec_id, cfg.name, rep, seed)
    try:
        inst = generate(spec.with_seed(seed))
        problem = build_problem(inst, cfg.problem)
        _, trace = get_solver(cfg.solver)(problem, cfg.options, truth=(inst.L0, inst.S0))
        errs = trace.column("rel_error")
        if not np.all(np.isfinite(errs)):
            raise FloatingPointError("non-finite relative error in trace")
        run.records = list(trace.records)
    except Exception as exc:  # a failing cell must not abort the grid
        run.error = f"{type(exc).__name__}: {exc}"
        run.records = []
    return run


def _spec_ids(specs):
    if isinstance(specs, dict):
        return list(specs.items())
    return [(f"spec{i}", s) for i, s in enumerate(specs)]


def run_benchmark(specs, solvers, replications: int = 1, grid_points: int = 50,
                  jobs: int = 1) -> BenchmarkResult:
    """Run every (spec, solver, replication) cell and aggregate.

    Parameters
    ----------
    specs : list of SyntheticSpec, or dict id -> SyntheticSpec
    solvers : list of SolverConfig or solver ids
    replications : int
    grid_points : int
        Size of each spec's time grid ``linspace(0, t_max, grid_points)``,
        where ``t_max`` is the longest trace recorded for that ``spec_id``.
    jobs : int
        Worker processes; results do not depend on it.
    """
    pairs = _spec_ids(specs)
    if not pairs:
        raise ValueError("at least one spec is required")
    cfgs = [c if isinstance(c, SolverConfig) else SolverConfig(c) for c in solvers]
    if not cfgs:
        raise ValueError("at least one solver is required")
    if replications < 1 or grid_points < 2 or jobs < 1:
        raise ValueError("replications and jobs must be >= 1, grid_points >= 2")
    for cfg in cfgs:
        get_solver(cfg.solver)
    cells = [(sid, spec, cfg, rep) for sid, spec in pairs for cfg in cfgs
             for rep in range(replications)]
    if jobs == 1:
        runs = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_cell, cells))
    return BenchmarkResult(aggregate(runs, [sid for sid, _ in pairs], cfgs, grid_points), runs)


def aggregate(runs, spec_ids, cfgs, grid_points: int) -> list:
    series = []
    for sid in spec_ids:
        mine = [r for r in runs if r.spec_id == sid and r.error is None]
        t_max = max((r.records[-1].elapsed_seconds for r in mine if r.records), default=0.0)
        grid = np.linspace(0.0, t_max, grid_points)
        for cfg in cfgs:
            good = [r for r in mine if r.solver == cfg.name]
            if not good:
                continue
            curves = np.array([interpolate(r.records, grid) for r in good])
            series.append(AggregateSeries(sid, cfg.name, grid, curves.mean(axis=0),
                                          curves.min(axis=0), curves.max(axis=0), len(good)))
    return series


def interpolate(records, grid) -> np.ndarray:
    """Relative error of a trace at the `grid` times, holding the last value."""
    t = np.array([r.elapsed_seconds for r in records])
    e = np.array([r.rel_error for r in records], dtype=float)
    return np.interp(grid, t, e)


def _fmt(x) -> str:
    return repr(float(x))


def write_aggregate_csv(path, series) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for s in series:
            for t, a, lo, hi in zip(s.grid, s.mean, s.min, s.max):
                w.writerow([s.spec_id, s.solver, _fmt(t), _fmt(a), _fmt(lo), _fmt(hi)])


def read_aggregate_csv(path) -> dict:
    """Return ``{(spec_id, solver): array of rows [t, mean, min, max]}``."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["spec_id"], row["solver"])
            out.setdefault(key, []).append([float(row[c]) for c in AGGREGATE_COLUMNS[2:]])
    return {k: np.array(v) for k, v in out.items()}


def write_outputs(result: BenchmarkResult, directory) -> dict:
    """Write ``aggregate.csv``, ``failures.csv`` and ``raw/<spec>/<solver>/rep<i>.csv``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    agg = out / "aggregate.csv"
    write_aggregate_csv(agg, result.series)
    for r in result.runs:
        if r.error is None:
            d = out / "raw" / r.spec_id / r.solver
            d.mkdir(parents=True, exist_ok=True)
            write_trace_csv(d / f"rep{r.replication}.csv", r.records)
    fail = out / "failures.csv"
    with open(fail, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FAILURE_COLUMNS)
        for r in result.failures:
            w.writerow([r.spec_id, r.solver, r.replication, r.seed, r.error])
    return {"aggregate": agg, "failures": fail, "raw": out / "raw"}


def spec_from_dict(d: dict) -> SyntheticSpec:
    snr = d.get("snr_db", math.inf)
    snr = math.inf if snr in ("inf", "+inf", None) else float(snr)
    return SyntheticSpec(int(d["n"]), float(d["c_r"]), float(d["c_p"]), snr, int(d.get("seed", 0)))

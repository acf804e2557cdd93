"""Command line: ``rpcakit {gen,solve,bench,eval}``.

Each command accepts ``--config FILE`` (JSON with the same keys as the long
flags, dashes replaced by underscores); explicit flags win.  The fully
resolved configuration is echoed as one JSON line on stderr and, for
commands with an output directory, saved there as ``config.json``.

Exit codes: 0 success/converged, 2 usage or configuration error,
3 iteration cap reached, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .base import DivergenceError, SolverOptions
from .bench import SolverConfig, run_benchmark, spec_from_dict, write_outputs
from .io import MatrixFormatError, load_matrix, save_matrix, write_trace_csv
from .model import Decomposition, RpcaProblem, relative_error
from .registry import UnknownSolverError, get_solver
from .svd import SvdConvergenceError
from .synthetic import SyntheticSpec, generate

EXIT_OK, EXIT_USAGE, EXIT_MAX_ITER, EXIT_NUMERIC = 0, 2, 3, 4
NUMERIC_ERRORS = (DivergenceError, SvdConvergenceError, np.linalg.LinAlgError,
                  FloatingPointError)


class UsageError(Exception):
    pass


def _float(text: str) -> float:
    return float(text)          # accepts "inf"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rpcakit", description="Robust PCA solvers.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--config")
    g.add_argument("--n", type=int)
    g.add_argument("--cr", type=float)
    g.add_argument("--cp", type=float)
    g.add_argument("--snr", type=_float)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")

    s = sub.add_parser("solve", help="run one solver on a matrix file")
    s.add_argument("--config")
    s.add_argument("--matrix")
    s.add_argument("--solver")
    s.add_argument("--out")
    s.add_argument("--truth-L", dest="truth_L")
    s.add_argument("--truth-S", dest="truth_S")
    for name in ("rho", "sigma", "mu", "rho1", "rho3"):
        s.add_argument(f"--{name}", type=float)
    s.add_argument("--rank", type=int, dest="rank_cap")
    s.add_argument("--sparsity", type=int, dest="sparsity_cap")
    s.add_argument("--max-iter", type=int, dest="max_iter")
    s.add_argument("--tol", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--clock", choices=("wall", "virtual"))
    s.add_argument("--set", action="append", metavar="KEY=VALUE", dest="set",
                   help="any other solver option, e.g. --set beta_growth=0.5")

    b = sub.add_parser("bench", help="run a benchmark grid from a JSON config")
    b.add_argument("--config")
    b.add_argument("--out")
    b.add_argument("--jobs", type=int)
    b.add_argument("--replications", type=int)
    b.add_argument("--grid-points", type=int, dest="grid_points")
    b.add_argument("--clock", choices=("wall", "virtual"))

    e = sub.add_parser("eval", help="relative error of (L, S) against (L0, S0)")
    e.add_argument("--config")
    for name in ("L", "S", "L0", "S0"):
        e.add_argument(f"--{name}", dest=name)
    return p


def _resolve(args, keys, defaults=None) -> dict:
    cfg = dict(defaults or {})
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        cfg.update(_from_json_safe(loaded))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError(f"missing required value(s): {', '.join(missing)}")


def _json_safe(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _from_json_safe(x):
    if x in ("inf", "+inf", "-inf"):
        return float(x)
    if isinstance(x, dict):
        return {k: _from_json_safe(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_from_json_safe(v) for v in x]
    return x


def _echo(cfg, out_dir=None):
    text = json.dumps(_json_safe(cfg), sort_keys=True)
    print(text, file=sys.stderr)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "config.json").write_text(
            json.dumps(_json_safe(cfg), indent=2, sort_keys=True) + "\n")


# -- gen --------------------------------------------------------------------------

def cmd_gen(args) -> int:
    cfg = _resolve(args, ("n", "cr", "cp", "snr", "seed", "out"),
                   {"snr": math.inf, "seed": 0})
    _require(cfg, "n", "cr", "cp", "out")
    snr = cfg["snr"] = float(cfg["snr"])
    fields = {"n": "n", "cr": "c_r", "cp": "c_p", "snr": "snr_db", "seed": "seed"}
    try:
        spec = SyntheticSpec(int(cfg["n"]), float(cfg["cr"]), float(cfg["cp"]), snr,
                             int(cfg["seed"]))
    except ValueError as exc:
        flag = next((f for f, name in fields.items() if str(exc).startswith(name)), None)
        where = f"--{flag}: " if flag else ""
        raise UsageError(f"invalid spec: {where}{exc}") from exc
    _echo(cfg, cfg["out"])
    for path in generate(spec).dump(cfg["out"]):
        print(path)
    return EXIT_OK


# -- solve ------------------------------------------------------------------------

_PROBLEM_KEYS = ("rho", "sigma", "mu", "rho1", "rho3", "rank_cap", "sparsity_cap")
_OPTION_FLAGS = ("max_iter", "tol", "seed", "clock")


def _parse_set(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except ValueError:
            out[k] = v
    return out


def cmd_solve(args) -> int:
    cfg = _resolve(args, ("matrix", "solver", "out", "truth_L", "truth_S"))
    _require(cfg, "matrix", "solver", "out")
    try:
        solver = get_solver(cfg["solver"])
    except UnknownSolverError as exc:
        raise UsageError(str(exc)) from exc
    problem_cfg = dict(cfg.get("problem", {}))
    problem_cfg.update({k: getattr(args, k) for k in _PROBLEM_KEYS
                        if getattr(args, k, None) is not None})
    opt_cfg = dict(cfg.get("options", {}))
    opt_cfg.update({k: getattr(args, k) for k in _OPTION_FLAGS
                    if getattr(args, k, None) is not None})
    opt_cfg.update(_parse_set(args.set))
    try:
        M = load_matrix(cfg["matrix"])
        problem = RpcaProblem(M, **problem_cfg)
        options = SolverOptions.from_dict(opt_cfg)
        truth = None
        if cfg.get("truth_L") or cfg.get("truth_S"):
            _require(cfg, "truth_L", "truth_S")
            truth = (load_matrix(cfg["truth_L"]), load_matrix(cfg["truth_S"]))
    except (OSError, MatrixFormatError, ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    cfg["problem"] = {k: getattr(problem, k) for k in _PROBLEM_KEYS}
    cfg["options"] = options.to_dict()
    _echo(cfg, cfg["out"])
    out = Path(cfg["out"])
    try:
        d, trace = solver(problem, options, truth=truth)
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    save_matrix(out / "L.bin", d.L)
    save_matrix(out / "S.bin", d.S)
    if d.N is not None:
        save_matrix(out / "N.bin", d.N)
    write_trace_csv(out / "trace.csv", trace.records)
    print(json.dumps({"status": trace.status, "iterations": trace.iterations,
                      "objective": d.objective, "primal_residual": d.primal_residual}))
    if not all(np.isfinite(X).all() for X in (d.L, d.S)):
        return EXIT_NUMERIC
    return EXIT_OK if trace.converged else EXIT_MAX_ITER


# -- bench ------------------------------------------------------------------------

def _solver_configs(items, clock):
    cfgs = []
    for item in items:
        if isinstance(item, str):
            item = {"id": item}
        opts = dict(item.get("options", {}))
        if clock is not None:
            opts["clock"] = clock
        cfgs.append(SolverConfig(item["id"], SolverOptions.from_dict(opts),
                                 dict(item.get("problem", {})), item.get("label")))
    return cfgs


def cmd_bench(args) -> int:
    cfg = _resolve(args, ("out", "jobs", "replications", "grid_points", "clock"),
                   {"jobs": 1, "replications": 1, "grid_points": 50})
    _require(cfg, "specs", "solvers", "out")
    try:
        raw_specs = cfg["specs"]
        if isinstance(raw_specs, list):
            raw_specs = {d.get("id", f"spec{i}"): d for i, d in enumerate(raw_specs)}
        specs = {sid: spec_from_dict(d) for sid, d in raw_specs.items()}
        cfgs = _solver_configs(cfg["solvers"], cfg.get("clock"))
        for c in cfgs:
            get_solver(c.solver)
    except UnknownSolverError as exc:
        raise UsageError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid bench config: {exc}") from exc
    cfg["specs"] = {sid: s.to_dict() for sid, s in specs.items()}
    cfg["solvers"] = [{"id": c.solver, "label": c.name, "options": c.options.to_dict(),
                       "problem": c.problem} for c in cfgs]
    _echo(cfg, cfg["out"])
    result = run_benchmark(specs, cfgs, replications=int(cfg["replications"]),
                           grid_points=int(cfg["grid_points"]), jobs=int(cfg["jobs"]))
    paths = write_outputs(result, cfg["out"])
    print(paths["aggregate"])
    if result.failures:
        print(f"{len(result.failures)} failed cell(s), see {paths['failures']}", file=sys.stderr)
    return EXIT_OK


# -- eval -------------------------------------------------------------------------

def cmd_eval(args) -> int:
    cfg = _resolve(args, ("L", "S", "L0", "S0"))
    _require(cfg, "L", "S", "L0", "S0")
    _echo(cfg)
    try:
        L, S, L0, S0 = (load_matrix(cfg[k]) for k in ("L", "S", "L0", "S0"))
        err = relative_error(Decomposition(L, S), L0, S0)
    except (OSError, MatrixFormatError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    print(f"{err:.6g}")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "eval": cmd_eval}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rpcakit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

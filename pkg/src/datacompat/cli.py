"""Command-line interface.

Subcommands:

* ``run``     load a config, sweep the ground-truth oracle, iterate the
  chosen method to its certified stop index or budget, write the trace
  CSV (and optionally figures), print the certificate.
* ``verify``  recompute every trace row and the certificate from the
  config and confirm the recorded stop index is minimal.
* ``batch``   fan independent configs out across worker processes.
* ``report``  render figures from an existing trace.

Exit codes: 0 success with a certified point; 1 parse or validation
error; 2 the oracle found no feasible point (empty reference set); 3 the
budget ran out before certification; 4 verification mismatch.

Numeric settings may be overridden per run: command-line flags beat
``DATACOMPAT_*`` environment variables, which beat the config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .compatibility import prox_value, tau_L_compatible
from .config import parse_config
from .errors import ConfigError, InfeasibleReferenceError
from .oracle import OracleCache, build_criteria
from .solvers import hsasm_run, hsm_run, hspsm_run
from .tracefile import TraceFooter, format_float, read_trace, write_trace

__all__ = ["main", "run_command", "verify_command", "batch_command", "report_command"]

SOLVERS = {"hsm": hsm_run, "hsasm": hsasm_run, "hspsm": hspsm_run}

ENV_PREFIX = "DATACOMPAT_"

_VERIFY_TOL = 1e-9


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_instance(config_path: str, overrides: dict):
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    merged = dict(data)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    cfg = parse_config(merged)
    return cfg.build()


def _open_cache(path: str | None, read_only: bool = False):
    if path is None:
        return None
    try:
        return OracleCache(path, read_only=read_only)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"oracle cache {path!r} is not valid JSON: {exc}") from exc


def _run_footer(result, criteria, gamma_star) -> TraceFooter:
    rep = result.report
    return TraceFooter(K=rep.out_index, dist_to_S=rep.dist_to_S, f_gap=rep.f_gap,
                       L_bar=criteria.l_bar, gamma_star=gamma_star)


def run_command(config_path: str, solver: str, trace_path: str,
                cache_path: str | None, overrides: dict,
                figures: str | None = None, quiet: bool = False,
                cache_read_only: bool = False) -> int:
    if solver not in SOLVERS:
        return _fail(f"unknown solver {solver!r}", 1)
    try:
        instance = _load_instance(config_path, overrides)
        cache = _open_cache(cache_path, read_only=cache_read_only)
    except ConfigError as exc:
        return _fail(str(exc), 1)

    try:
        criteria, gamma_star = build_criteria(instance, cache)
    except InfeasibleReferenceError as exc:
        return _fail(str(exc), 2)
    except ValueError as exc:
        return _fail(str(exc), 1)

    try:
        result = SOLVERS[solver](instance, criteria)
    except ConfigError as exc:
        return _fail(str(exc), 1)

    footer = _run_footer(result, criteria, gamma_star)
    try:
        write_trace(trace_path, result.rows, footer)
    except OSError as exc:
        return _fail(f"cannot write trace {trace_path!r}: {exc}", 1)

    if not quiet:
        print(f"K={'undefined' if footer.K is None else footer.K}")
        print(f"dist_to_S={format_float(footer.dist_to_S)}")
        print(f"f_gap={format_float(footer.f_gap)}")
        print(f"L_bar={format_float(footer.L_bar)}")
        print(f"gamma_star={format_float(footer.gamma_star)}")
        print(f"iterations_used={result.iterations_used}")
        print(f"trace={trace_path}")
    if figures is not None:
        from .report import render_figures

        for path in render_figures(result.rows, footer, figures):
            if not quiet:
                print(f"figure={path}")
    return 0 if footer.K is not None else 3


def verify_command(config_path: str, trace_path: str, cache_path: str | None,
                   overrides: dict) -> int:
    try:
        instance = _load_instance(config_path, overrides)
        cache = _open_cache(cache_path, read_only=True)
    except ConfigError as exc:
        return _fail(str(exc), 1)
    try:
        rows, footer = read_trace(trace_path)
    except OSError as exc:
        return _fail(f"cannot read trace {trace_path!r}: {exc}", 1)
    except ValueError as exc:
        return _fail(f"malformed trace: {exc}", 1)

    try:
        criteria, gamma_star = build_criteria(instance, cache)
    except InfeasibleReferenceError as exc:
        return _fail(str(exc), 2)
    except ValueError as exc:
        return _fail(str(exc), 1)

    def mismatch(msg: str) -> int:
        print(f"verify mismatch: {msg}", file=sys.stderr)
        return 4

    operator = instance.build_operator()
    f = instance.objective
    k_first = None
    for i, row in enumerate(rows):
        if row.k != i:
            return mismatch(f"row {i} has k={row.k}, expected {i}")
        if row.x.size != instance.dim:
            return mismatch(f"row {i} has {row.x.size} coordinates, expected {instance.dim}")
        alpha = instance.schedule(i)
        if abs(row.alpha - alpha) > _VERIFY_TOL:
            return mismatch(f"row {i}: alpha {row.alpha!r} != schedule value {alpha!r}")
        fx = f.value(row.x)
        if abs(row.f - fx) > _VERIFY_TOL:
            return mismatch(f"row {i}: f {row.f!r} != recomputed {fx!r}")
        px = prox_value(instance.family, row.x)
        if abs(row.prox - px) > _VERIFY_TOL:
            return mismatch(f"row {i}: prox {row.prox!r} != recomputed {px!r}")
        if i == 0:
            expected_res = 0.0
        else:
            expected_res = float(np.linalg.norm(row.x - operator(rows[i - 1].x)))
        if abs(row.residual - expected_res) > _VERIFY_TOL:
            return mismatch(f"row {i}: residual {row.residual!r} != recomputed {expected_res!r}")
        ok, _, _ = tau_L_compatible(row.x, criteria, f)
        if ok and k_first is None:
            k_first = i

    if footer.K != k_first:
        return mismatch(f"footer K={footer.K} but first compatible row is {k_first}")
    at = rows[k_first if k_first is not None else -1]
    _, dist, f_gap = tau_L_compatible(at.x, criteria, f)
    if abs(footer.dist_to_S - dist) > _VERIFY_TOL:
        return mismatch(f"footer dist_to_S={footer.dist_to_S!r}, recomputed {dist!r}")
    if abs(footer.f_gap - f_gap) > _VERIFY_TOL:
        return mismatch(f"footer f_gap={footer.f_gap!r}, recomputed {f_gap!r}")
    if abs(footer.L_bar - criteria.l_bar) > _VERIFY_TOL:
        return mismatch(f"footer L_bar={footer.L_bar!r}, recomputed {criteria.l_bar!r}")
    if abs(footer.gamma_star - gamma_star) > _VERIFY_TOL:
        return mismatch(f"footer gamma_star={footer.gamma_star!r}, recomputed {gamma_star!r}")
    print(f"verified: {trace_path} (K={'undefined' if footer.K is None else footer.K})")
    return 0


def _batch_worker(task) -> int:
    config_path, solver, trace_path, cache_path, overrides = task
    return run_command(config_path, solver, trace_path, cache_path, overrides,
                       quiet=True, cache_read_only=True)


def batch_command(config_paths, solver: str, trace_dir: str, jobs: int,
                  cache_path: str | None, overrides: dict) -> int:
    try:
        os.makedirs(trace_dir, exist_ok=True)
    except OSError as exc:
        return _fail(f"cannot create trace directory {trace_dir!r}: {exc}", 1)
    tasks = []
    used = set()
    for path in config_paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        name = stem
        suffix = 1
        while name in used:
            name = f"{stem}_{suffix}"
            suffix += 1
        used.add(name)
        tasks.append((path, solver, os.path.join(trace_dir, f"{name}.trace.csv"),
                      cache_path, overrides))
    if jobs < 1:
        return _fail("jobs must be at least 1", 1)
    if jobs == 1:
        codes = [_batch_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_batch_worker, tasks))
    for (path, _, trace_path, _, _), code in zip(tasks, codes):
        print(f"{path}: exit {code} (trace={trace_path})")
    return max(codes)


def report_command(trace_path: str, out_prefix: str) -> int:
    try:
        rows, footer = read_trace(trace_path)
    except OSError as exc:
        return _fail(f"cannot read trace {trace_path!r}: {exc}", 1)
    except ValueError as exc:
        return _fail(f"malformed trace: {exc}", 1)
    from .report import render_figures

    for path in render_figures(rows, footer, out_prefix):
        print(f"figure={path}")
    return 0


def _env_setting(name: str, cast, problems: list):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        problems.append(f"environment variable {ENV_PREFIX + name}={raw!r} is not valid")
        return None


def _collect_overrides(args, problems: list) -> dict:
    overrides = {
        "tau": _env_setting("TAU", float, problems),
        "gamma": _env_setting("GAMMA", float, problems),
        "seed": _env_setting("SEED", int, problems),
        "max_iter": _env_setting("MAX_ITER", int, problems),
    }
    for key, flag_value in (("tau", args.tau), ("gamma", args.gamma),
                            ("seed", args.seed), ("max_iter", args.max_iter)):
        if flag_value is not None:
            overrides[key] = flag_value
    return overrides


def _resolve_solver(args, problems: list) -> str:
    if args.solver is not None:
        return args.solver
    env = os.environ.get(ENV_PREFIX + "SOLVER")
    if env is not None:
        if env not in SOLVERS:
            problems.append(f"environment variable {ENV_PREFIX}SOLVER={env!r} is not a solver")
            return "hsm"
        return env
    return "hsm"


def _resolve_cache(args) -> str | None:
    if args.oracle_cache is not None:
        return args.oracle_cache
    return os.environ.get(ENV_PREFIX + "ORACLE_CACHE")


def _add_override_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, default=None, help="iteration budget override")
    p.add_argument("--tau", type=float, default=None, help="compatibility radius override")
    p.add_argument("--gamma", type=float, default=None, help="proximity budget override")
    p.add_argument("--seed", type=int, default=None, help="seed override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datacompat",
        description="Certified finite-termination solvers for convex minimization "
                    "over fixed-point sets of projection-built operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a solver on one config")
    p.add_argument("--config", required=True, help="instance config (JSON)")
    p.add_argument("--solver", choices=sorted(SOLVERS), default=None)
    p.add_argument("--trace", default=None, help="trace CSV output path")
    p.add_argument("--oracle-cache", default=None, help="oracle sidecar path")
    p.add_argument("--figures", default=None, metavar="PREFIX",
                   help="also render figures with this path prefix")
    _add_override_flags(p)

    p = sub.add_parser("verify", help="recheck a trace against its config")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--oracle-cache", default=None)
    _add_override_flags(p)

    p = sub.add_parser("batch", help="run many configs across processes")
    p.add_argument("configs", nargs="+", help="instance config paths")
    p.add_argument("--solver", choices=sorted(SOLVERS), default=None)
    p.add_argument("--trace-dir", default=".", help="directory for trace files")
    p.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))
    p.add_argument("--oracle-cache", default=None,
                   help="oracle sidecar path (read-only in batch mode)")
    _add_override_flags(p)

    p = sub.add_parser("report", help="render figures from a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", default=None, metavar="PREFIX",
                   help="figure path prefix (default: trace path without extension)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "report":
        prefix = args.out if args.out is not None else os.path.splitext(args.trace)[0]
        return report_command(args.trace, prefix)

    problems: list = []
    overrides = _collect_overrides(args, problems)
    if problems:
        return _fail("; ".join(problems), 1)

    if args.command == "run":
        solver = _resolve_solver(args, problems)
        if problems:
            return _fail("; ".join(problems), 1)
        trace = args.trace
        if trace is None:
            trace = os.path.splitext(os.path.basename(args.config))[0] + ".trace.csv"
        return run_command(args.config, solver, trace, _resolve_cache(args),
                           overrides, figures=args.figures)
    if args.command == "verify":
        return verify_command(args.config, args.trace, _resolve_cache(args), overrides)
    if args.command == "batch":
        solver = _resolve_solver(args, problems)
        if problems:
            return _fail("; ".join(problems), 1)
        return batch_command(args.configs, solver, args.trace_dir, args.jobs,
                             _resolve_cache(args), overrides)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())

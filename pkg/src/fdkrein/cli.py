"""Command-line front end.

    fdkrein solve1d  --config P [--out F] [--seed S] [--check] [--threads N]
    fdkrein solve2d  --config P ...
    fdkrein check    --config P
    fdkrein converge [--config P] [--out F]
    fdkrein bench    [--config P] [--out F] [--seed S]

Exit codes: 0 ok, 1 configuration error, 2 mathematical error (spectrum or
singularity), 3 I/O error.  Errors are reported on stderr as one JSON
object ``{"error": <name>, "message": <text>}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BENCH_COLUMNS, bench_size
from .config import (
    BENCH_SCHEMA,
    CONVERGE_SCHEMA,
    from_complex,
    load_json,
    parse_problem,
    read_rhs_file,
    to_complex,
    validate,
)
from .errors import ConfigError, KreinError, MathError
from .krein import CountingResolvent
from .laplace import BvpSolver, DefectSolver, periodic_resolvent
from .linalg import lu_factor, lu_solve
from .rng import SplitMix64
from .schrodinger import convergence_study, exp_cos, fourier_mode

log = logging.getLogger("fdkrein")

EXIT_OK, EXIT_CONFIG, EXIT_MATH, EXIT_IO = 0, 1, 2, 3
DENSE_CAP = 4096


class SizeCapExceeded(ConfigError):
    pass


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def sidecar_path(out) -> Path:
    return Path(out).with_suffix(".json")


def _fmt(x: float) -> str:
    return repr(float(x))


def solution_csv(partition, values, oracle=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    coords = ["x"] if partition.dim == 1 else ["x", "y"]
    w.writerow(coords + ["re", "im"] + (["oracle_re", "oracle_im"] if oracle is not None else []))
    for i, p in enumerate(partition.omega):
        row = list(p) + [_fmt(values[i].real), _fmt(values[i].imag)]
        if oracle is not None:
            row += [_fmt(oracle[i].real), _fmt(oracle[i].imag)]
        w.writerow(row)
    return buf.getvalue()


def _load_config(path, required=True) -> dict:
    if path is None:
        if required:
            raise ConfigError("--config is required for this command")
        return {}
    data = load_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return data


def _rhs(cfg, size: int, seed: int, base_dir) -> np.ndarray:
    spec = cfg.rhs_spec
    if spec is None:
        return SplitMix64(seed).complex_uniform(size)
    if isinstance(spec, str):
        f = read_rhs_file(spec, base_dir)
    else:
        f = np.array([to_complex(v) for v in spec])
    if f.size != size:
        raise ConfigError(f"rhs has {f.size} entries, the domain has {size} points")
    return f


def _build_solver(cfg, threads: int):
    base = CountingResolvent(periodic_resolvent(cfg.geometry.full(), cfg.lam))
    if cfg.holes:
        solver = DefectSolver(cfg.defect, cfg.lam, base=base, threads=threads)
    else:
        solver = BvpSolver(cfg.geometry, cfg.extension, cfg.lam, base=base, threads=threads)
    return solver, base


def _dense_oracle(solver, f) -> np.ndarray:
    a = solver.operator().toarray()
    return lu_solve(lu_factor(a), f)


def cmd_solve(args, dim: int) -> int:
    path = args.config
    cfg = parse_problem(_load_config(path))
    if cfg.geometry.dim != dim:
        raise ConfigError(f"solve{dim}d needs a {dim}D geometry, config has dim={cfg.geometry.dim}")
    seed = args.seed if args.seed is not None else cfg.seed
    out = args.out or cfg.out or "solution.csv"
    t0 = time.perf_counter()
    solver, base = _build_solver(cfg, args.threads)
    build_columns = base.applies + base.column_requests
    f = _rhs(cfg, solver.partition.size, seed, Path(path).parent)
    before = base.applies
    x = solver.solve(f).values
    solve_applies = base.applies - before
    runtime = (time.perf_counter() - t0) * 1e3
    res = solver.residual(x, f)

    sidecar = {
        "residual": res,
        "boundary_system_size": solver.system_size,
        "base_applies": solve_applies,
        "build_base_columns": build_columns,
        "runtime_ms": runtime,
        "unknowns": solver.partition.size,
        "lambda": from_complex(cfg.lam),
        "seed": seed,
    }
    if cfg.holes:
        sidecar["boundary_system_sizes"] = list(solver.system_sizes)
    oracle = None
    if args.check:
        if solver.partition.size <= cfg.cap:
            oracle = _dense_oracle(solver, f)
            sidecar["oracle_rel_err"] = float(np.linalg.norm(x - oracle) / np.linalg.norm(oracle))
        else:
            sidecar["oracle_rel_err"] = None
            log.warning("oracle skipped: %d unknowns exceed cap %d", solver.partition.size, cfg.cap)
    _emit(solution_csv(solver.partition, x, oracle), out)
    if out != "-":
        write_atomic(sidecar_path(out), json.dumps(sidecar, indent=2) + "\n")
    log.info("residual %.3e, boundary system %d", res, solver.system_size)
    return EXIT_OK


def cmd_check(args) -> int:
    path = args.config
    cfg = parse_problem(_load_config(path))
    size = cfg.unknowns
    if size > cfg.cap:
        raise SizeCapExceeded(f"dense oracle refused: {size} unknowns exceed the cap of {cfg.cap}")
    seed = args.seed if args.seed is not None else cfg.seed
    solver, _ = _build_solver(cfg, args.threads)
    f = _rhs(cfg, size, seed, Path(path).parent)
    x = solver.solve(f).values
    oracle = _dense_oracle(solver, f)
    report = {
        "unknowns": size,
        "boundary_system_size": solver.system_size,
        "max_rel_discrepancy": float(np.abs(x - oracle).max() / np.abs(oracle).max()),
        "rel_discrepancy_2norm": float(np.linalg.norm(x - oracle) / np.linalg.norm(oracle)),
        "residual": solver.residual(x, f),
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


def _phi_from(spec):
    if spec in (None, "exp_cos"):
        return exp_cos
    if spec == "constant":
        return lambda x: np.ones_like(np.asarray(x), dtype=complex)
    return fourier_mode(int(spec["mode"]))


def cmd_converge(args) -> int:
    data = _load_config(args.config, required=False)
    validate(data, CONVERGE_SCHEMA)
    report = convergence_study(
        mu=float(data.get("mu", 1.0)),
        lam=to_complex(data.get("lambda", [0.5, 0.5])),
        phi=_phi_from(data.get("phi")),
        M_list=data.get("M_list", [16, 32, 64, 128]),
        truncation=int(data.get("truncation", 4096)),
        quad_points=int(data.get("quad_points", 8192)),
    )
    _emit(report.to_csv(), args.out or data.get("out"))
    log.info("tail bound of truncated series: %.3e", report.tail_bound)
    return EXIT_OK


def cmd_bench(args) -> int:
    data = _load_config(args.config, required=False)
    validate(data, BENCH_SCHEMA)
    seed = args.seed if args.seed is not None else int(data.get("seed", 0))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for n in data.get("sizes", [16, 32, 64]):
        row = bench_size(
            n,
            repeats=int(data.get("repeats", 20)),
            build_repeats=int(data.get("build_repeats", 3)),
            lam=to_complex(data.get("lambda", [0.5, 0.5])),
            k=to_complex(data.get("k", 0.3)),
            dense_cap=int(data.get("dense_cap", DENSE_CAP)),
            seed=seed,
            threads=args.threads,
        )
        w.writerow([row.N, row.M, row.unknowns, row.boundary_size, row.repeats,
                    f"{row.build_ms_median:.4f}", f"{row.per_rhs_ms_median:.4f}",
                    "" if row.dense_ms_median is None else f"{row.dense_ms_median:.4f}"])
    _emit(buf.getvalue(), args.out or data.get("out"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON problem description")
    common.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    common.add_argument("--seed", type=int, metavar="U64", help="seed for generated right-hand sides")
    common.add_argument("--check", action="store_true", help="add a dense-oracle column when size permits")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for system builds")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="fdkrein", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("solve1d", "solve a 1D boundary-value problem"),
        ("solve2d", "solve a 2D boundary-value problem (holes allowed)"),
        ("check", "compare the fast path with a dense LU oracle"),
        ("converge", "point-interaction convergence study"),
        ("bench", "timing of build, per-RHS solve and dense LU"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        return _fail(EXIT_CONFIG, ConfigError("--seed must be an unsigned 64-bit integer"))
    handlers = {
        "solve1d": lambda a: cmd_solve(a, 1),
        "solve2d": lambda a: cmd_solve(a, 2),
        "check": cmd_check,
        "converge": cmd_converge,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except MathError as exc:
        return _fail(EXIT_MATH, exc)
    except (ConfigError, KreinError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)


if __name__ == "__main__":
    sys.exit(main())

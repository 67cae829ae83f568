"""Timing of the repeated right-hand-side path against dense LU."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .difference_ops import Geometry, third_kind_extension
from .laplace import DEFAULT_LAMBDA, BvpSolver
from .linalg import lu_factor, lu_solve
from .rng import SplitMix64

__all__ = ["BenchRow", "bench_size", "per_rhs_medians", "BENCH_COLUMNS"]

BENCH_COLUMNS = ("N", "M", "unknowns", "boundary_size", "repeats",
                 "build_ms_median", "per_rhs_ms_median", "dense_ms_median")


@dataclass
class BenchRow:
    N: int
    M: int
    unknowns: int
    boundary_size: int
    repeats: int
    build_ms_median: float
    per_rhs_ms_median: float
    dense_ms_median: float | None


def _median_ms(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def bench_size(n: int, m: int | None = None, repeats: int = 20, build_repeats: int = 3,
               lam: complex = DEFAULT_LAMBDA, k: complex = 0.3, dense_cap: int = 4096,
               seed: int = 0, threads: int = 1) -> BenchRow:
    """Time build, per-RHS solve and (below ``dense_cap`` unknowns) dense LU
    for a third-kind problem on an ``n x m`` rectangle."""
    m = n if m is None else m
    geometry = Geometry(2, n, m)
    ext = third_kind_extension(geometry.partition, k)
    solver = None

    def build():
        nonlocal solver
        solver = BvpSolver(geometry, ext, lam, threads=threads)

    build_ms = _median_ms(build, build_repeats)
    f = SplitMix64(seed).complex_uniform(n * m)
    per_rhs = _median_ms(lambda: solver.resolvent.apply(f), repeats)

    dense_ms = None
    if n * m <= dense_cap:
        a = solver.operator().toarray()
        dense_ms = _median_ms(lambda: lu_solve(lu_factor(a), f), build_repeats)
    return BenchRow(n, m, n * m, solver.system_size, repeats, build_ms, per_rhs, dense_ms)


def per_rhs_medians(sizes, repeats: int = 20, lam: complex = DEFAULT_LAMBDA, k: complex = 0.3,
                    seed: int = 0, warmup: int = 3) -> list[float]:
    """Median per-RHS solve time (ms) for each square size.

    Solvers are built up front and timed round-robin, one solve per size
    per round, so slow drift in machine load affects every size alike.
    """
    solvers, rhs = [], []
    for n in sizes:
        g = Geometry(2, n, n)
        solvers.append(BvpSolver(g, third_kind_extension(g.partition, k), lam))
        rhs.append(SplitMix64(seed).complex_uniform(n * n))
    times = [[] for _ in sizes]
    for rnd in range(warmup + repeats):
        for i, (solver, f) in enumerate(zip(solvers, rhs)):
            t0 = time.perf_counter()
            solver.resolvent.apply(f)
            if rnd >= warmup:
                times[i].append((time.perf_counter() - t0) * 1e3)
    return [statistics.median(t) for t in times]

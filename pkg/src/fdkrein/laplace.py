"""Difference Laplacian solvers.

The periodic extension of the 1D/2D difference Laplacian is diagonal in the
unitary DFT basis, so its resolvent costs two transforms.  Any other
extension differs from it by a boundary-row perturbation and is solved
through a boundary system; removed points (holes) add one rank-one term
each on top of the rectangle solver.  The Thomas sweep is kept as an
independent O(N) check for tridiagonal 1D problems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .dft import dft2_forward, dft2_inverse, dft_forward, dft_inverse
from .difference_ops import (
    ExtensionOperator,
    Geometry,
    GridFunction,
    UNIT_OFFSETS_2D,
    assemble_extended,
    hole_extension,
    periodic_extension,
    perturbation_between,
    third_kind_extension,
)
from .errors import InvalidDefect, LambdaOnSpectrum, ZeroPivot
from .krein import KreinResolvent, ResolventHandle
from .linalg import residual
from .lowrank import LowRankPerturbation

__all__ = [
    "DEFAULT_LAMBDA",
    "SPECTRAL_TOL",
    "laplacian_symbol",
    "PeriodicResolvent1D",
    "PeriodicResolvent2D",
    "periodic_resolvent_1d",
    "periodic_resolvent_2d",
    "periodic_resolvent",
    "BvpSolver",
    "solve_bvp",
    "sweep_solve_tridiagonal",
    "DefectProblem",
    "DefectSolver",
    "hole_perturbation",
    "solve_defect",
]

DEFAULT_LAMBDA = 0.5 + 0.5j
SPECTRAL_TOL = 1e-10


def laplacian_symbol(n: int) -> np.ndarray:
    """Eigenvalues ``-4 sin^2(pi k / n)`` of the periodic 1D Laplacian."""
    return -4.0 * np.sin(np.pi * np.arange(n) / n) ** 2


def _check_spectrum(shifted: np.ndarray, lam):
    dist = float(np.abs(shifted).min())
    if dist < SPECTRAL_TOL:
        raise LambdaOnSpectrum(f"lambda={lam} lies within {dist:.2e} of the periodic spectrum")


class PeriodicResolvent1D(ResolventHandle):
    """``(scale * Delta_0 - lam E)^-1`` on ``n`` points, applied as
    ``F^* diag(1 / (scale * symbol - lam)) F``."""

    def __init__(self, n: int, lam: complex, scale: float = 1.0):
        if n < 2:
            raise ValueError("periodic resolvent needs n >= 2")
        self.n = n
        self.lam = complex(lam)
        self.scale = scale
        shifted = scale * laplacian_symbol(n) - self.lam
        _check_spectrum(shifted, self.lam)
        self.symbol = 1.0 / shifted

    def _apply(self, v, symbol):
        v = np.asarray(v, dtype=complex)
        s = symbol if v.ndim == 1 else symbol[:, None]
        return dft_inverse(s * dft_forward(v, axis=0), axis=0)

    def apply(self, v):
        return self._apply(v, self.symbol)

    def adjoint_apply(self, v):
        return self._apply(v, np.conj(self.symbol))

    @cached_property
    def kernel(self) -> np.ndarray:
        """``R delta_0``; every column of ``R`` is a cyclic shift of it."""
        e0 = np.zeros(self.n, dtype=complex)
        e0[0] = 1.0
        return self.apply(e0)

    def columns(self, idx):
        idx = np.asarray(idx, dtype=int)
        return self.kernel[(np.arange(self.n)[:, None] - idx[None, :]) % self.n]


class PeriodicResolvent2D(ResolventHandle):
    """Resolvent of the periodic 2D Laplacian on an ``n x m`` grid
    (row-major flattening)."""

    def __init__(self, n: int, m: int, lam: complex):
        if n < 2 or m < 2:
            raise ValueError("periodic resolvent needs n, m >= 2")
        self.shape = (n, m)
        self.n = n * m
        self.lam = complex(lam)
        shifted = laplacian_symbol(n)[:, None] + laplacian_symbol(m)[None, :] - self.lam
        _check_spectrum(shifted, self.lam)
        self.symbol = 1.0 / shifted

    def _apply(self, v, symbol):
        v = np.asarray(v, dtype=complex)
        grid = v.reshape(*self.shape, *v.shape[1:])
        s = symbol if v.ndim == 1 else symbol[..., None]
        out = dft2_inverse(s * dft2_forward(grid, axes=(0, 1)), axes=(0, 1))
        return out.reshape(v.shape)

    def apply(self, v):
        return self._apply(v, self.symbol)

    def adjoint_apply(self, v):
        return self._apply(v, np.conj(self.symbol))

    @cached_property
    def kernel(self) -> np.ndarray:
        e0 = np.zeros(self.shape, dtype=complex)
        e0[0, 0] = 1.0
        return self.apply(e0.ravel()).reshape(self.shape)

    def columns(self, idx):
        idx = np.asarray(idx, dtype=int)
        n, m = self.shape
        qx, qy = np.divmod(idx, m)
        rows = (np.arange(n)[:, None, None] - qx[None, None, :]) % n
        cols = (np.arange(m)[None, :, None] - qy[None, None, :]) % m
        return self.kernel[rows, cols].reshape(n * m, idx.size)


def periodic_resolvent_1d(n: int, lam: complex, scale: float = 1.0) -> PeriodicResolvent1D:
    return PeriodicResolvent1D(n, lam, scale)


def periodic_resolvent_2d(n: int, m: int, lam: complex) -> PeriodicResolvent2D:
    return PeriodicResolvent2D(n, m, lam)


def periodic_resolvent(geometry: Geometry, lam: complex) -> ResolventHandle:
    if geometry.dim == 1:
        return PeriodicResolvent1D(geometry.n, lam)
    return PeriodicResolvent2D(geometry.n, geometry.m, lam)


class BvpSolver:
    """Solver for ``(A_K - lam E) x = f`` on a segment or full rectangle.

    The periodic resolvent is the base; ``K`` enters through the boundary
    perturbation ``A_K - A_0``.  Construction builds and factors the
    boundary system, after which ``solve`` may be called for many
    right-hand sides.

    Parameters
    ----------
    geometry : Geometry
        Segment or rectangle without holes.
    extension : ExtensionOperator
        Target boundary condition.
    lam : complex
        Spectral parameter; must be off the periodic spectrum.
    base : ResolventHandle, optional
        Override for the periodic base (e.g. a counting wrapper).
    """

    def __init__(self, geometry: Geometry, extension: ExtensionOperator, lam: complex = DEFAULT_LAMBDA,
                 base: ResolventHandle | None = None, threads: int = 1):
        if geometry.holes:
            raise InvalidDefect("use DefectSolver for geometries with holes")
        self.geometry = geometry
        self.partition = geometry.partition
        self.extension = extension
        self.lam = complex(lam)
        self.base = base if base is not None else periodic_resolvent(geometry, self.lam)
        periodic = periodic_extension(self.partition, geometry.shape)
        self.perturbation = perturbation_between(self.partition, periodic, extension)
        self.resolvent = KreinResolvent(self.base, self.perturbation, threads=threads)

    @property
    def system_size(self) -> int:
        return self.resolvent.system.size

    def operator(self) -> sp.csr_matrix:
        """Sparse ``A_K - lam E``."""
        a = assemble_extended(self.partition, self.extension, sparse=True)
        return (a - self.lam * sp.identity(self.partition.size, dtype=complex, format="csr")).tocsr()

    def solve(self, f) -> GridFunction:
        f = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=complex)
        return GridFunction(self.partition, self.resolvent.apply(f))

    def residual(self, x, f) -> float:
        x = x.values if isinstance(x, GridFunction) else x
        f = f.values if isinstance(f, GridFunction) else f
        return residual(self.operator(), x, f)


def solve_bvp(geometry: Geometry, extension: ExtensionOperator, lam: complex, f) -> GridFunction:
    return BvpSolver(geometry, extension, lam).solve(f)


def sweep_solve_tridiagonal(sub, diag, sup, f) -> np.ndarray:
    """Thomas sweep for ``sub[i-1] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = f[i]``.

    No pivoting; raises ``ZeroPivot`` if an eliminated diagonal vanishes.
    """
    a = np.asarray(sub, dtype=complex)
    b = np.asarray(diag, dtype=complex)
    c = np.asarray(sup, dtype=complex)
    d = np.asarray(f, dtype=complex)
    n = b.size
    if a.size != n - 1 or c.size != n - 1 or d.size != n:
        raise ValueError("tridiagonal bands have inconsistent lengths")
    scale = np.abs(b).max() + (np.abs(a).max() if n > 1 else 0.0)
    cp = np.empty(n, dtype=complex)
    dp = np.empty(n, dtype=complex)
    piv = b[0]
    if abs(piv) <= 1e-14 * scale:
        raise ZeroPivot("zero pivot in row 0")
    cp[0] = c[0] / piv if n > 1 else 0.0
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i - 1] * cp[i - 1]
        if abs(piv) <= 1e-14 * scale:
            raise ZeroPivot(f"zero pivot in row {i}")
        cp[i] = c[i] / piv if i < n - 1 else 0.0
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / piv
    x = np.empty(n, dtype=complex)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@dataclass
class DefectProblem:
    """Rectangle ``n x m`` with removed inner points.

    ``holes`` maps each removed point to its four hole coefficients
    ``alpha(eps)`` in ``UNIT_OFFSETS_2D`` order.  The outer boundary uses the
    local condition with coefficients ``k`` (scalar, one per exterior point
    of the full rectangle, or a mapping), unless ``extension`` is given.
    """

    n: int
    m: int
    holes: Mapping = field(default_factory=dict)
    k: object = 0.0
    extension: ExtensionOperator | None = None

    def __post_init__(self):
        self.holes = {tuple(int(c) for c in p): np.asarray(a, dtype=complex) for p, a in self.holes.items()}
        pts = list(self.holes)
        for p in pts:
            if not (1 <= p[0] <= self.n - 2 and 1 <= p[1] <= self.m - 2):
                raise InvalidDefect(f"hole {p} is not an inner point of the {self.n}x{self.m} rectangle")
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                if abs(p[0] - q[0]) + abs(p[1] - q[1]) < 2:
                    raise InvalidDefect(f"holes {p} and {q} are adjacent")

    @property
    def rectangle(self) -> Geometry:
        return Geometry(2, self.n, self.m)

    @property
    def geometry(self) -> Geometry:
        return Geometry(2, self.n, self.m, tuple(self.holes))

    def outer_extension(self) -> ExtensionOperator:
        if self.extension is not None:
            return self.extension
        return third_kind_extension(self.rectangle.partition, self.k)

    def extension_on_holed(self) -> ExtensionOperator:
        """Extension operator of the holed domain: outer rules plus hole rules."""
        part = self.geometry.partition
        outer = self.outer_extension()
        for q, rule in outer.rules.items():
            for p, _ in rule:
                if tuple(p) in self.holes:
                    raise InvalidDefect(f"outer rule for {q} references hole {p}")
        return hole_extension(part, outer, self.holes)


def hole_perturbation(partition, holes: Mapping) -> LowRankPerturbation:
    """Rank-one terms turning the rectangle operator into the holed one.

    For each hole ``p`` the term is ``u (x) (alpha - delta_p)`` where ``u``
    holds the stencil weights of the taps that reach ``p``.  It removes
    column ``p`` (except the diagonal) and routes those taps through the
    hole functional, so with ``x(p)`` decoupled the remaining rows are
    exactly the holed operator.
    """
    n = partition.size
    us, ws = [], []
    for p, alpha in holes.items():
        p = tuple(p)
        u = np.zeros(n, dtype=complex)
        for off, c in partition.stencil.taps.items():
            if any(off):
                x = tuple(a - b for a, b in zip(p, off))
                u[partition.index[x]] += c
        w = np.zeros(n, dtype=complex)
        for e, a in zip(UNIT_OFFSETS_2D, alpha):
            w[partition.index[(p[0] + e[0], p[1] + e[1])]] += a
        w[partition.index[p]] -= 1.0
        us.append(u)
        ws.append(w)
    return LowRankPerturbation.from_factors(np.array(us).T.reshape(n, -1), np.array(ws).reshape(-1, n))


class DefectSolver:
    """Holed-rectangle solver: rectangle Krein resolvent plus one rank-one
    update per hole."""

    def __init__(self, problem: DefectProblem, lam: complex = DEFAULT_LAMBDA,
                 base: ResolventHandle | None = None, threads: int = 1):
        self.problem = problem
        self.lam = complex(lam)
        problem.extension_on_holed()  # validates outer rules against the holes
        self.rect = BvpSolver(problem.rectangle, problem.outer_extension(), self.lam, base=base, threads=threads)
        self.full = self.rect.partition
        self.partition = problem.geometry.partition
        self.perturbation = hole_perturbation(self.full, problem.holes)
        self.resolvent = KreinResolvent(self.rect.resolvent, self.perturbation, threads=threads)
        self._keep = np.array([self.full.index[p] for p in self.partition.omega], dtype=int)

    @property
    def system_sizes(self) -> tuple[int, int]:
        return self.rect.system_size, self.resolvent.system.size

    @property
    def system_size(self) -> int:
        return sum(self.system_sizes)

    def operator(self) -> sp.csr_matrix:
        a = assemble_extended(self.partition, self.problem.extension_on_holed(), sparse=True)
        return (a - self.lam * sp.identity(self.partition.size, dtype=complex, format="csr")).tocsr()

    def solve(self, f) -> GridFunction:
        f = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=complex)
        if f.shape[0] != self.partition.size:
            raise ValueError(f"rhs must have {self.partition.size} entries (holes excluded)")
        embedded = np.zeros((self.full.size,) + f.shape[1:], dtype=complex)
        embedded[self._keep] = f
        return GridFunction(self.partition, self.resolvent.apply(embedded)[self._keep])

    def residual(self, x, f) -> float:
        x = x.values if isinstance(x, GridFunction) else x
        f = f.values if isinstance(f, GridFunction) else f
        return residual(self.operator(), x, f)


def solve_defect(problem: DefectProblem, lam: complex, f) -> GridFunction:
    return DefectSolver(problem, lam).solve(f)

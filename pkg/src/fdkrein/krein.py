"""Resolvent of a low-rank perturbation from the resolvent of the original.

With ``R = (A - lam E)^-1`` known and ``B = U W`` of small rank ``s``,

    (A + B - lam E)^-1 f = R f - R U w,   (E_s + W R U) w = W R f.

The ``s x s`` matrix ``E_s + W R U`` is the boundary system (the
capacitance matrix when ``U`` selects boundary rows).  It is assembled and
factored once; every further right-hand side then costs two applications of
``R`` plus an ``s x s`` triangular solve.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import LambdaOnSpectrum, ResonantRankOne, SingularBoundarySystem, SingularMatrix
from .linalg import LuFactorization, lu_factor, lu_solve
from .lowrank import LowRankPerturbation

__all__ = [
    "ResolventHandle",
    "DenseResolvent",
    "CountingResolvent",
    "KreinResolvent",
    "BoundarySystem",
    "build_boundary_system",
    "solve_with_system",
    "krein_solve",
    "rank1_correction_inverse",
    "Rank1Inverse",
    "rank1_solve",
    "BOUNDARY_PIVOT_TOL",
]

BOUNDARY_PIVOT_TOL = 1e-12


class ResolventHandle:
    """Black-box applicator of ``(A - lam E)^-1`` and of its adjoint.

    ``apply`` accepts a vector of length ``n`` or an ``(n, k)`` block of
    columns.  Implementations are stateless after construction.
    """

    n: int
    lam: complex

    def apply(self, v) -> np.ndarray:
        raise NotImplementedError

    def adjoint_apply(self, v) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self) -> "ResolventHandle":
        return _AdjointView(self)

    def columns(self, idx) -> np.ndarray:
        """Columns ``idx`` of the resolvent matrix, shape ``(n, len(idx))``."""
        idx = np.asarray(idx, dtype=int)
        unit = np.zeros((self.n, idx.size), dtype=complex)
        unit[idx, np.arange(idx.size)] = 1.0
        return self.apply(unit)

    def matrix(self) -> np.ndarray:
        """Dense matrix of the applicator (small n only)."""
        return self.columns(np.arange(self.n))


class _AdjointView(ResolventHandle):
    def __init__(self, inner: ResolventHandle):
        self.inner = inner
        self.n = inner.n
        self.lam = np.conj(inner.lam)

    def apply(self, v):
        return self.inner.adjoint_apply(v)

    def adjoint_apply(self, v):
        return self.inner.apply(v)


class DenseResolvent(ResolventHandle):
    """``(A - lam E)^-1`` through a dense LU factorization."""

    def __init__(self, a, lam: complex = 0.0):
        a = np.asarray(a, dtype=complex)
        self.n = a.shape[0]
        self.lam = complex(lam)
        try:
            self._lu = lu_factor(a - self.lam * np.eye(self.n))
        except SingularMatrix as exc:
            raise LambdaOnSpectrum(f"lambda={self.lam} is (numerically) an eigenvalue: {exc}") from exc

    def apply(self, v):
        return lu_solve(self._lu, v)

    def adjoint_apply(self, v):
        return lu_solve(self._lu, v, trans=2)


class CountingResolvent(ResolventHandle):
    """Wraps a handle and counts applied columns (forward and adjoint)."""

    def __init__(self, inner: ResolventHandle):
        self.inner = inner
        self.n = inner.n
        self.lam = inner.lam
        self.applies = 0
        self.adjoint_applies = 0
        self.column_requests = 0

    @staticmethod
    def _columns(v):
        v = np.asarray(v)
        return 1 if v.ndim == 1 else v.shape[1]

    def apply(self, v):
        self.applies += self._columns(v)
        return self.inner.apply(v)

    def adjoint_apply(self, v):
        self.adjoint_applies += self._columns(v)
        return self.inner.adjoint_apply(v)

    def columns(self, idx):
        self.column_requests += len(idx)
        return self.inner.columns(idx)


@dataclass(frozen=True)
class BoundarySystem:
    """Factored ``E_s + W R U`` for a perturbation ``B = U W``."""

    support: np.ndarray
    matrix: np.ndarray
    factorization: LuFactorization

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def build_boundary_system(
    base: ResolventHandle,
    d: LowRankPerturbation,
    chunk: int = 64,
    threads: int = 1,
) -> BoundarySystem:
    """Assemble and factor the boundary system.

    Entry ``(p, q)`` is ``delta_pq + (W R u_q)_p``, computed in blocks of
    ``chunk`` columns.  When ``U`` is a row selection the needed columns of
    ``R`` are requested through ``base.columns`` (which structured
    resolvents answer without a full application per column).

    Raises
    ------
    SingularBoundarySystem
        If a pivot falls below ``1e-12`` times ``1 + max row sum of |D R|``, i.e. ``lam``
        is (numerically) an eigenvalue of the perturbed operator.
    """
    if d.n != base.n:
        raise ValueError(f"perturbation size {d.n} does not match resolvent size {base.n}")
    s = d.size
    mat = np.eye(s, dtype=complex)

    def block(start):
        stop = min(start + chunk, s)
        if d.rows is not None:
            r_cols = base.columns(d.rows[start:stop])
        else:
            r_cols = base.apply(d.left[:, start:stop].toarray())
        return start, stop, d.right @ r_cols

    starts = range(0, s, chunk)
    if threads > 1 and s > chunk:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(block, starts))
    else:
        results = [block(start) for start in starts]
    summand = np.zeros(s)
    for start, stop, vals in results:
        mat[:, start:stop] += vals
        summand += np.abs(vals).sum(axis=1)

    # measure pivots against E and D R before they cancel; a 1x1 system
    # would otherwise be judged against its own (vanishing) value
    scale = 1.0 + float(summand.max()) if s else 1.0
    try:
        lu = lu_factor(mat, tol=BOUNDARY_PIVOT_TOL, scale=scale)
    except SingularMatrix as exc:
        raise SingularBoundarySystem(
            f"boundary system of size {s} is singular at lambda={base.lam}: {exc}"
        ) from exc
    return BoundarySystem(d.support, mat, lu)


def solve_with_system(base: ResolventHandle, d: LowRankPerturbation, system: BoundarySystem, f) -> np.ndarray:
    """Repeated right-hand-side path: two ``base.apply`` calls per solve."""
    rf = base.apply(f)
    if system.size == 0:
        return rf
    w = lu_solve(system.factorization, d.right @ rf)
    return rf - base.apply(d.left @ w)


def krein_solve(base: ResolventHandle, d: LowRankPerturbation, f) -> np.ndarray:
    """``(A + B - lam E)^-1 f`` given ``base = (A - lam E)^-1`` and ``d = B``."""
    if d.size == 0:
        return base.apply(f)
    return solve_with_system(base, d, build_boundary_system(base, d), f)


class KreinResolvent(ResolventHandle):
    """Resolvent of ``A + B`` as a handle, built on the resolvent of ``A``.

    The forward boundary system is built eagerly; the adjoint one (needed
    only for adjoint applications) on first use.
    """

    def __init__(self, base: ResolventHandle, d: LowRankPerturbation, threads: int = 1):
        self.base = base
        self.perturbation = d
        self.n = base.n
        self.lam = base.lam
        self.threads = threads
        self.system = build_boundary_system(base, d, threads=threads)
        self._adjoint = None

    def apply(self, v):
        return solve_with_system(self.base, self.perturbation, self.system, v)

    def adjoint_apply(self, v):
        if self._adjoint is None:
            self._adjoint = KreinResolvent(self.base.adjoint(), self.perturbation.adjoint(), self.threads)
        return self._adjoint.apply(v)


class Rank1Inverse:
    """Closed form of ``(E + B R)^-1`` for ``B = e (x) phi``.

    ``phi`` acts by the bilinear pairing ``phi(v) = sum(phi * v)``, so

        (E + B R)^-1 u = u - phi(R u) / (1 + phi(R e)) * e.

    ``phi(R u)`` is evaluated as ``<R^* conj(phi), u>`` with ``R^*`` the
    conjugate transpose; ``R^* conj(phi)`` is computed once.
    """

    def __init__(self, base: ResolventHandle, e, phi, tol: float = 1e-12):
        self.e = np.asarray(e, dtype=complex)
        self.phi = np.asarray(phi, dtype=complex)
        self.denominator = complex(1.0 + np.sum(self.phi * base.apply(self.e)))
        if abs(self.denominator) < tol:
            raise ResonantRankOne(f"1 + phi(R e) = {self.denominator:.3e} vanishes")
        self.dual = base.adjoint_apply(np.conj(self.phi))

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        coef = np.conj(self.dual) @ u / self.denominator
        return u - np.multiply.outer(self.e, coef) if u.ndim > 1 else u - coef * self.e

    def matrix(self) -> np.ndarray:
        n = self.e.size
        return self(np.eye(n, dtype=complex))


def rank1_correction_inverse(base: ResolventHandle, e, phi) -> Rank1Inverse:
    return Rank1Inverse(base, e, phi)


def rank1_solve(base: ResolventHandle, e, phi, f) -> np.ndarray:
    """``(A + e (x) phi - lam E)^-1 f`` through the rank-1 closed form."""
    inv = Rank1Inverse(base, e, phi)
    rf = base.apply(f)
    z = inv(np.multiply.outer(inv.e, inv.phi @ rf) if np.ndim(rf) > 1 else (inv.phi @ rf) * inv.e)
    return rf - base.apply(z)

"""Dense complex linear algebra and the brute-force oracle.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128``;
matrices are row-major (C order).  The LU factorization is LAPACK ``getrf``
(through ``scipy.linalg``) with an explicit pivot-size check on top, since
LAPACK only reports exact zeros.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, SingularMatrix

__all__ = [
    "LuFactorization",
    "as_matrix",
    "as_vector",
    "lu_factor",
    "lu_solve",
    "dense_inverse",
    "apply",
    "gemm",
    "axpy",
    "dot",
    "norm",
    "residual",
    "PIVOT_TOL",
]

PIVOT_TOL = 1e-13


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {a.shape}")
    return a


def as_vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=complex)
    if a.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class LuFactorization:
    """Packed ``PA = LU`` factors.

    ``lu`` holds the unit lower triangle of L below the diagonal and U on and
    above it; ``piv`` is in LAPACK convention (row ``i`` was swapped with row
    ``piv[i]``).
    """

    lu: np.ndarray
    piv: np.ndarray
    parity: int
    min_pivot: float

    @property
    def n(self) -> int:
        return self.lu.shape[0]

    def permutation(self) -> np.ndarray:
        """Row permutation ``perm`` with ``(PA)[i] = A[perm[i]]``."""
        perm = np.arange(self.n)
        for i, p in enumerate(self.piv):
            perm[i], perm[p] = perm[p], perm[i]
        return perm

    def unpack(self):
        """Return dense ``(P, L, U)`` with ``P @ A == L @ U``."""
        n = self.n
        L = np.tril(self.lu, -1) + np.eye(n)
        U = np.triu(self.lu)
        P = np.eye(n, dtype=complex)[self.permutation()]
        return P, L, U


def lu_factor(m, tol: float = PIVOT_TOL, scale: float | None = None) -> LuFactorization:
    """LU factorization with partial pivoting.

    Parameters
    ----------
    scale : float, optional
        Reference magnitude for the pivot test.  Defaults to the largest
        absolute row sum of ``m``; callers that form ``m`` as a sum with
        cancellation should pass the scale of the summands instead.

    Raises
    ------
    SingularMatrix
        If some pivot has magnitude below ``tol * scale``.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"lu_factor needs a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise SingularMatrix("matrix has non-finite entries")
    n = a.shape[0]
    if n == 0:
        return LuFactorization(np.zeros((0, 0), complex), np.zeros(0, int), 1, np.inf)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    min_pivot = float(pivots.min())
    if scale is None:
        scale = float(np.abs(a).sum(axis=1).max())
    if scale == 0.0 or min_pivot < tol * scale:
        raise SingularMatrix(
            f"pivot {min_pivot:.3e} below {tol:g} x row-norm {scale:.3e}"
        )
    parity = -1 if np.count_nonzero(piv != np.arange(n)) % 2 else 1
    return LuFactorization(lu, piv, parity, min_pivot)


def lu_solve(f: LuFactorization, rhs, trans: int = 0) -> np.ndarray:
    """Solve ``A x = rhs`` (``trans=2``: ``A^H x = rhs``) from factors.

    ``rhs`` may be a vector or a matrix of stacked columns.
    """
    b = np.asarray(rhs, dtype=complex)
    if b.shape[0] != f.n:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, factorization is {f.n}x{f.n}")
    if f.n == 0:
        return b.copy()
    return sla.lu_solve((f.lu, f.piv), b, trans=trans, check_finite=False)


def dense_inverse(m) -> np.ndarray:
    a = as_matrix(m)
    return lu_solve(lu_factor(a), np.eye(a.shape[0], dtype=complex))


def apply(m, v) -> np.ndarray:
    a = as_matrix(m)
    x = np.asarray(v, dtype=complex)
    if a.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"cannot apply {a.shape} matrix to length {x.shape[0]}")
    return a @ x


def gemm(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"gemm shapes {a.shape} and {b.shape} do not chain")
    return a @ b


def axpy(alpha, x, y) -> np.ndarray:
    x, y = as_vector(x), as_vector(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"axpy lengths {x.size} and {y.size} differ")
    return alpha * x + y


def dot(a, b) -> complex:
    """``sum(conj(a) * b)``; conjugate-linear in the first argument."""
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dot lengths {a.size} and {b.size} differ")
    return complex(np.vdot(a, b))


def norm(v, ord=2) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=complex).ravel(), ord))


def residual(m, x, rhs) -> float:
    """Relative residual ``||m x - rhs|| / ||rhs||``.

    ``m`` may be dense or any object supporting ``@`` (e.g. scipy sparse).
    """
    x = np.asarray(x, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    r = np.linalg.norm(m @ x - rhs)
    scale = np.linalg.norm(rhs)
    return float(r / scale) if scale > 0 else float(r)

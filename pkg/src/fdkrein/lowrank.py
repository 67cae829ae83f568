"""Factored low-rank perturbations ``B = U @ W``.

``U`` is ``n x s`` and ``W`` is ``s x n``, both held as scipy sparse
matrices.  The common case, a perturbation that only touches a few rows of
the operator (a boundary correction), is stored with ``U`` a column
selection: column ``i`` of ``U`` is the unit vector at ``rows[i]`` and row
``i`` of ``W`` is the functional applied there.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch

__all__ = ["LowRankPerturbation"]


class LowRankPerturbation:
    """Perturbation ``B = left @ right`` of an ``n x n`` operator.

    Parameters
    ----------
    left : sparse or dense array, shape (n, s)
    right : sparse or dense array, shape (s, n)
    rows : sequence of int, optional
        Set when ``left`` is a column selection; ``rows[i]`` is the row hit
        by column ``i``.  ``from_rows`` fills it in.
    """

    def __init__(self, left, right, rows=None):
        left = sp.csc_matrix(left, dtype=complex)
        right = sp.csr_matrix(right, dtype=complex)
        if left.shape[1] != right.shape[0] or left.shape[0] != right.shape[1]:
            raise DimensionMismatch(
                f"factor shapes {left.shape} and {right.shape} do not form a square perturbation"
            )
        self.left = left
        self.right = right
        self.rows = None if rows is None else tuple(int(r) for r in rows)

    @classmethod
    def from_rows(cls, n, rows, functionals):
        """Row-supported perturbation: row ``rows[i]`` of ``B`` is ``functionals[i]``."""
        rows = [int(r) for r in rows]
        if len(set(rows)) != len(rows):
            raise ValueError("row indices must be distinct")
        s = len(rows)
        left = sp.csc_matrix(
            (np.ones(s, dtype=complex), (rows, np.arange(s))), shape=(n, s)
        )
        right = sp.csr_matrix(functionals, dtype=complex, shape=(s, n)) if s else sp.csr_matrix((0, n), dtype=complex)
        return cls(left, right, rows)

    @classmethod
    def from_factors(cls, u, w):
        return cls(u, w)

    @classmethod
    def empty(cls, n):
        return cls.from_rows(n, [], sp.csr_matrix((0, n), dtype=complex))

    @property
    def n(self) -> int:
        return self.left.shape[0]

    @property
    def size(self) -> int:
        """Number of factor columns, i.e. the boundary-system dimension."""
        return self.left.shape[1]

    @property
    def support(self) -> np.ndarray:
        """Row indices on which ``B`` can be nonzero."""
        if self.rows is not None:
            return np.array(self.rows, dtype=int)
        return np.unique(self.left.nonzero()[0])

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return self.left @ (self.right @ v)

    def densify(self) -> np.ndarray:
        return (self.left @ self.right).toarray()

    def adjoint(self) -> "LowRankPerturbation":
        return LowRankPerturbation(self.right.conj().T, self.left.conj().T)

    def __add__(self, other: "LowRankPerturbation") -> "LowRankPerturbation":
        if other.n != self.n:
            raise DimensionMismatch(f"cannot add perturbations of size {self.n} and {other.n}")
        rows = None
        if self.rows is not None and other.rows is not None:
            rows = self.rows + other.rows
            if len(set(rows)) != len(rows):
                rows = None
        return LowRankPerturbation(
            sp.hstack([self.left, other.left]), sp.vstack([self.right, other.right]), rows
        )

    def __repr__(self):
        return f"LowRankPerturbation(n={self.n}, size={self.size})"

"""Formal difference operators on subsets of Z and Z^2.

A stencil assigns to every lattice point ``x`` a finite tap set with
coefficients.  Given a finite domain ``omega`` the points split into inner
points (all taps inside), boundary points (some tap outside) and the
exterior points reached from the boundary.  An extension operator supplies,
for every exterior point, a linear functional of the values on ``omega``;
folding the exterior taps through those functionals gives a square matrix on
``omega``, and two extensions differ by a perturbation living on the
boundary rows only.

Points are integer tuples, ``(x,)`` in 1D and ``(x, y)`` in 2D.  Every
ordered collection of points in this module is sorted lexicographically, so
on an ``n x m`` rectangle the ordinal of ``(x, y)`` is ``x * m + y``
(row-major, matching a C-ordered ``(n, m)`` array).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    EmptyOmega,
    InvalidDefect,
    MissingExteriorRule,
    NotFound,
    NotUnique,
)
from .lowrank import LowRankPerturbation

__all__ = [
    "Stencil",
    "LAPLACIAN_1D",
    "LAPLACIAN_2D",
    "UNIT_OFFSETS_2D",
    "GridPartition",
    "ExtensionOperator",
    "Geometry",
    "GridFunction",
    "classify",
    "epsilon_of",
    "assemble_extended",
    "perturbation_between",
    "periodic_extension",
    "third_kind_extension",
    "extension_from_rows",
    "hole_extension",
    "point_norm",
]

Point = tuple


def point_norm(p: Sequence[int]) -> int:
    """``|p| = sum |coords|``."""
    return sum(abs(c) for c in p)


def _add(p, q):
    return tuple(a + b for a, b in zip(p, q))


@dataclass(frozen=True)
class Stencil:
    """Translation-invariant stencil: ``(A f)(x) = sum_o taps[o] * f(x + o)``."""

    taps: Mapping[tuple, complex]

    def __post_init__(self):
        if not self.taps:
            raise ValueError("stencil needs at least one tap")
        dims = {len(o) for o in self.taps}
        if len(dims) != 1:
            raise ValueError("stencil offsets must share one dimension")

    @property
    def dim(self) -> int:
        return len(next(iter(self.taps)))

    def at(self, x: Point) -> list[tuple[Point, complex]]:
        """Tap points of ``x`` with their coefficients."""
        return [(_add(x, o), c) for o, c in self.taps.items()]


LAPLACIAN_1D = Stencil({(-1,): 1.0, (0,): -2.0, (1,): 1.0})
LAPLACIAN_2D = Stencil({(-1, 0): 1.0, (0, -1): 1.0, (0, 0): -4.0, (0, 1): 1.0, (1, 0): 1.0})

# hole coefficients alpha(eps) are listed in this order
UNIT_OFFSETS_2D = ((-1, 0), (0, -1), (0, 1), (1, 0))


def _unit_offsets(dim):
    out = []
    for i in range(dim):
        for s in (-1, 1):
            e = [0] * dim
            e[i] = s
            out.append(tuple(e))
    return sorted(out)


@dataclass(frozen=True, eq=False)
class GridPartition:
    """Classification of a finite domain with respect to a stencil."""

    stencil: Stencil
    omega: tuple
    interior: tuple
    boundary: tuple
    exterior: tuple
    index: Mapping[Point, int] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.omega)

    @property
    def dim(self) -> int:
        return self.stencil.dim

    def __contains__(self, p) -> bool:
        return tuple(p) in self.index

    @cached_property
    def exterior_index(self) -> dict:
        return {q: i for i, q in enumerate(self.exterior)}

    @cached_property
    def boundary_ordinals(self) -> np.ndarray:
        return np.array([self.index[x] for x in self.boundary], dtype=int)


def classify(stencil: Stencil, omega: Iterable[Sequence[int]]) -> GridPartition:
    pts = sorted({tuple(int(c) for c in p) for p in omega})
    if not pts:
        raise EmptyOmega("domain has no points")
    if any(len(p) != stencil.dim for p in pts):
        raise ValueError(f"points must have dimension {stencil.dim}")
    index = {p: i for i, p in enumerate(pts)}
    interior, boundary, exterior = [], [], set()
    for x in pts:
        outside = [y for y, _ in stencil.at(x) if y not in index]
        if outside:
            boundary.append(x)
            exterior.update(outside)
        else:
            interior.append(x)
    return GridPartition(
        stencil, tuple(pts), tuple(interior), tuple(boundary), tuple(sorted(exterior)), index
    )


def epsilon_of(partition: GridPartition, q: Sequence[int]) -> tuple:
    """The unique unit offset ``eps`` with ``q + eps`` in the domain.

    Raises ``NotFound`` if ``q`` is not an exterior point or no such offset
    exists, ``NotUnique`` if several do (e.g. a removed interior point).
    """
    q = tuple(q)
    if q not in partition.exterior_index:
        raise NotFound(f"{q} is not an exterior point of the domain")
    hits = [e for e in _unit_offsets(len(q)) if _add(q, e) in partition.index]
    if not hits:
        raise NotFound(f"no unit neighbour of {q} lies in the domain")
    if len(hits) > 1:
        raise NotUnique(f"{q} has {len(hits)} unit neighbours in the domain: {hits}")
    return hits[0]


@dataclass(frozen=True)
class ExtensionOperator:
    """Maps values on the domain to values at exterior points.

    ``rules[q]`` is the functional giving the value at exterior point ``q``
    as a tuple of ``(domain point, coefficient)`` pairs.  On the domain
    itself the extension is the identity, which is implicit.
    """

    rules: Mapping[Point, tuple]

    def functional(self, q: Point) -> tuple:
        try:
            return self.rules[q]
        except KeyError:
            raise MissingExteriorRule(f"no extension rule for exterior point {q}") from None

    def functional_row(self, partition: GridPartition, q: Point) -> dict:
        """Functional at ``q`` as ``{ordinal: coefficient}``, duplicates summed."""
        row = defaultdict(complex)
        for p, c in self.functional(q):
            try:
                row[partition.index[tuple(p)]] += c
            except KeyError:
                raise MissingExteriorRule(
                    f"rule for {q} references {tuple(p)}, which is outside the domain"
                ) from None
        return row


def periodic_extension(partition: GridPartition, shape: Sequence[int]) -> ExtensionOperator:
    """Wrap exterior points back into the box ``shape`` coordinate-wise."""
    rules = {}
    for q in partition.exterior:
        w = tuple(c % s for c, s in zip(q, shape))
        if w not in partition.index:
            raise MissingExteriorRule(f"periodic image {w} of {q} is not in the domain")
        rules[q] = ((w, 1.0),)
    return ExtensionOperator(rules)


def _coefficients(points, k):
    if isinstance(k, Mapping):
        return [complex(k[q]) for q in points]
    arr = np.asarray(k, dtype=complex)
    if arr.ndim == 0:
        return [complex(arr)] * len(points)
    if arr.shape != (len(points),):
        raise ValueError(f"expected {len(points)} coefficients, got shape {arr.shape}")
    return list(arr)


def third_kind_extension(partition: GridPartition, k, points=None) -> ExtensionOperator:
    """Local boundary condition ``(K f)(q) = k(q) f(q + eps(q))``.

    ``k`` is a scalar, a sequence aligned with ``points`` (default: all
    exterior points in partition order), or a mapping keyed by point.
    ``k = 0`` is a zero ghost value, ``k = 1`` mirrors the nearest domain value,
    ``k = -1`` is the antisymmetric (Dirichlet) ghost.
    """
    points = partition.exterior if points is None else tuple(tuple(q) for q in points)
    coeffs = _coefficients(points, k)
    rules = {}
    for q, c in zip(points, coeffs):
        rules[q] = ((_add(q, epsilon_of(partition, q)), c),)
    return ExtensionOperator(rules)


def extension_from_rows(partition: GridPartition, rows) -> ExtensionOperator:
    """Extension given by a dense ``#exterior x #omega`` matrix (one row per
    exterior point, in partition order)."""
    mat = np.asarray(rows, dtype=complex)
    if mat.shape != (len(partition.exterior), partition.size):
        raise ValueError(
            f"custom rows must have shape {(len(partition.exterior), partition.size)}, got {mat.shape}"
        )
    rules = {}
    for q, row in zip(partition.exterior, mat):
        nz = np.flatnonzero(row)
        rules[q] = tuple((partition.omega[j], row[j]) for j in nz)
    return ExtensionOperator(rules)


def hole_extension(partition: GridPartition, outer: ExtensionOperator, holes: Mapping) -> ExtensionOperator:
    """Add hole rules ``(K f)(p) = sum_eps alpha(eps) f(p + eps)`` to ``outer``.

    ``holes`` maps each removed point to its four coefficients, ordered as
    ``UNIT_OFFSETS_2D``.
    """
    rules = dict(outer.rules)
    for p, alpha in holes.items():
        p = tuple(p)
        alpha = np.asarray(alpha, dtype=complex)
        if alpha.shape != (len(UNIT_OFFSETS_2D),):
            raise ValueError(f"hole {p} needs {len(UNIT_OFFSETS_2D)} coefficients")
        taps = []
        for e, a in zip(UNIT_OFFSETS_2D, alpha):
            nb = _add(p, e)
            if nb not in partition.index:
                raise InvalidDefect(f"neighbour {nb} of hole {p} is not in the domain")
            taps.append((nb, a))
        rules[p] = tuple(taps)
    return ExtensionOperator(rules)


def _extended_triplets(partition: GridPartition, ext: ExtensionOperator, rows_only=None):
    rows, cols, vals = [], [], []
    cache = {}
    points = partition.omega if rows_only is None else rows_only
    for x in points:
        i = partition.index[x]
        for y, a in partition.stencil.at(x):
            j = partition.index.get(y)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(a)
                continue
            if y not in cache:
                cache[y] = ext.functional_row(partition, y)
            for j, c in cache[y].items():
                rows.append(i)
                cols.append(j)
                vals.append(a * c)
    return rows, cols, vals


def assemble_extended(partition: GridPartition, ext: ExtensionOperator, sparse: bool = False):
    """Matrix of the ``ext``-extension of the stencil on the domain.

    Inner rows are plain stencil rows; each exterior tap of a boundary row is
    replaced by the extension functional at that point.
    """
    n = partition.size
    rows, cols, vals = _extended_triplets(partition, ext)
    mat = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(n, n))
    return mat if sparse else mat.toarray()


def perturbation_between(
    partition: GridPartition, l: ExtensionOperator, k: ExtensionOperator
) -> LowRankPerturbation:
    """``D`` with ``A_k = A_l + D``, stored by its nonzero boundary rows."""
    n = partition.size
    support, data = [], []
    for x in partition.boundary:
        acc = defaultdict(complex)
        for y, a in partition.stencil.at(x):
            if y in partition.index:
                continue
            for j, c in k.functional_row(partition, y).items():
                acc[j] += a * c
            for j, c in l.functional_row(partition, y).items():
                acc[j] -= a * c
        row = {j: v for j, v in acc.items() if v != 0}
        if row:
            support.append(partition.index[x])
            data.append(row)
    r, c, v = [], [], []
    for i, row in enumerate(data):
        for j, val in sorted(row.items()):
            r.append(i)
            c.append(j)
            v.append(val)
    functionals = sp.csr_matrix((np.asarray(v, dtype=complex), (r, c)), shape=(len(support), n))
    return LowRankPerturbation.from_rows(n, support, functionals)


@dataclass(frozen=True)
class Geometry:
    """A segment ``{0..n-1}`` or rectangle ``{0..n-1} x {0..m-1}``, optionally
    with removed points (2D only)."""

    dim: int
    n: int
    m: int | None = None
    holes: tuple = ()

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.n < 1:
            raise EmptyOmega("grid size must be positive")
        if self.dim == 2:
            if self.m is None:
                object.__setattr__(self, "m", self.n)
            if self.m < 1:
                raise EmptyOmega("grid size must be positive")
        elif self.m is not None:
            raise ValueError("1D geometry takes no 'm'")
        holes = tuple(sorted({tuple(int(c) for c in p) for p in self.holes}))
        if holes and self.dim != 2:
            raise InvalidDefect("holes are only supported in 2D")
        object.__setattr__(self, "holes", holes)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Geometry":
        return cls(int(d["dim"]), int(d["n"]), d.get("m"), tuple(tuple(p) for p in d.get("holes", ())))

    @property
    def shape(self) -> tuple:
        return (self.n,) if self.dim == 1 else (self.n, self.m)

    @property
    def stencil(self) -> Stencil:
        return LAPLACIAN_1D if self.dim == 1 else LAPLACIAN_2D

    def full(self) -> "Geometry":
        return Geometry(self.dim, self.n, self.m if self.dim == 2 else None)

    @cached_property
    def partition(self) -> GridPartition:
        pts = np.ndindex(*self.shape)
        removed = set(self.holes)
        return classify(self.stencil, (p for p in pts if p not in removed))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on the ordered domain of ``partition``."""

    partition: GridPartition
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.partition.size,):
            raise ValueError(f"expected {self.partition.size} values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def __getitem__(self, p) -> complex:
        return self.values[self.partition.index[tuple(p)]]

    def on_grid(self, shape) -> np.ndarray:
        """Values as an array of ``shape``; removed points read 0."""
        out = np.zeros(shape, dtype=complex)
        idx = tuple(np.array(self.partition.omega).T)
        out[idx] = self.values
        return out

    @classmethod
    def delta(cls, partition: GridPartition, x) -> "GridFunction":
        v = np.zeros(partition.size, dtype=complex)
        v[partition.index[tuple(x)]] = 1.0
        return cls(partition, v)

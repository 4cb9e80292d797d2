"""Exact convex polyhedra over the rationals.

A :class:`Polyhedron` carries both a half-space representation (primitive
integer rows ``a . x >= b``) and a generator representation (vertices as
Fraction tuples, rays as primitive integer tuples; a line appears as a pair of
opposite rays).  Both representations are canonicalized at construction via
the double description method, so equal sets built through different routes
have identical, byte-stable representations.  Instances are immutable and safe
to share across threads.

Every operation is exact.  Cost grows quickly with ambient dimension (double
description is worst-case exponential); the library is intended for desk-scale
dimensions, roughly up to 24.  There is no floating-point fallback.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

from .dd import IntVec, cone_generators, dot, primitive
from .rationals import NEG_INF, ExtRat

Constraint = Tuple[IntVec, int]
Vertex = Tuple[Fraction, ...]


def _normalize_constraints(
    constraints: Iterable[Tuple[Sequence, object]], dim: int
) -> Tuple[List[Constraint], bool]:
    """Scale constraints to primitive integer form; returns (rows, infeasible)."""
    rows: dict = {}
    for a, b in constraints:
        a = tuple(Fraction(x) for x in a)
        if len(a) != dim:
            raise ValueError(f"constraint has dimension {len(a)}, expected {dim}")
        b = Fraction(b)
        if not any(a):
            if b > 0:
                return [], True
            continue
        row = primitive(a + (b,))
        rows.setdefault((row[:-1], row[-1]), None)
    return list(rows), False


def _h_to_v(rows: Sequence[Constraint], dim: int) -> Tuple[List[Vertex], List[IntVec]]:
    """Canonical generators of {x : a.x >= b}; empty vertex list means empty set."""
    cone_rows: List[Tuple[int, ...]] = [(-b,) + a for a, b in rows]
    cone_rows.append((1,) + (0,) * dim)
    lines, rays = cone_generators(cone_rows, dim + 1)
    vertices: List[Vertex] = []
    out_rays: List[IntVec] = []
    for r in rays:
        if r[0] > 0:
            vertices.append(tuple(Fraction(x, r[0]) for x in r[1:]))
        else:
            out_rays.append(r[1:])
    for l in lines:
        if l[0] != 0:  # cannot happen: the x0 >= 0 row pins lineality to x0 = 0
            raise AssertionError("lineality escaped the homogenization slice")
        out_rays.append(l[1:])
        out_rays.append(tuple(-x for x in l[1:]))
    if not vertices:
        return [], []
    vertices.sort()
    out_rays.sort()
    return vertices, out_rays


def _v_to_h(
    vertices: Sequence[Sequence], rays: Sequence[Sequence], dim: int
) -> List[Constraint]:
    """Canonical minimal half-space representation of conv(vertices) + cone(rays)."""
    gen_rows: List[Sequence] = [(1,) + tuple(Fraction(x) for x in v) for v in vertices]
    gen_rows += [(0,) + tuple(Fraction(x) for x in r) for r in rays]
    lines, drays = cone_generators(gen_rows, dim + 1)
    out: List[Constraint] = []
    for l in lines:
        a = l[1:]
        if not any(a):
            raise AssertionError("degenerate affine-hull functional")
        out.append((a, -l[0]))
        out.append((tuple(-x for x in a), l[0]))
    for r in drays:
        a = r[1:]
        if not any(a):
            continue  # the trivial x0 >= 0 facet
        out.append((a, -r[0]))
    out.sort()
    return out


class Polyhedron:
    """A closed convex rational polyhedron with canonical dual representations."""

    __slots__ = ("dim", "_hrep", "_vertices", "_rays")

    def __init__(self, *_args, **_kwargs):
        raise TypeError("use Polyhedron.from_halfspaces / from_generators / empty")

    @classmethod
    def _build(cls, dim, hrep, vertices, rays) -> "Polyhedron":
        self = object.__new__(cls)
        self.dim = dim
        self._hrep = tuple(hrep)
        self._vertices = tuple(vertices)
        self._rays = tuple(rays)
        return self

    @classmethod
    def from_halfspaces(
        cls, constraints: Iterable[Tuple[Sequence, object]], dim: int
    ) -> "Polyhedron":
        """Polyhedron {x : a . x >= b for every (a, b)}, canonicalized."""
        if dim < 1:
            raise ValueError("ambient dimension must be >= 1")
        rows, infeasible = _normalize_constraints(constraints, dim)
        if infeasible:
            return cls.empty(dim)
        vertices, rays = _h_to_v(rows, dim)
        if not vertices:
            return cls.empty(dim)
        hrep = _v_to_h(vertices, rays, dim)
        return cls._build(dim, hrep, vertices, rays)

    @classmethod
    def from_generators(
        cls, vertices: Iterable[Sequence], rays: Iterable[Sequence] = (), *, dim: int
    ) -> "Polyhedron":
        """Polyhedron conv(vertices) + cone(rays), canonicalized."""
        if dim < 1:
            raise ValueError("ambient dimension must be >= 1")
        vlist = [tuple(Fraction(x) for x in v) for v in vertices]
        rlist = [tuple(Fraction(x) for x in r) for r in rays]
        for v in vlist + rlist:
            if len(v) != dim:
                raise ValueError(f"generator has dimension {len(v)}, expected {dim}")
        rlist = [r for r in rlist if any(r)]
        if not vlist:
            return cls.empty(dim)
        hrep = _v_to_h(vlist, rlist, dim)
        vertices2, rays2 = _h_to_v(hrep, dim)
        return cls._build(dim, hrep, vertices2, rays2)

    @classmethod
    def empty(cls, dim: int) -> "Polyhedron":
        return cls._build(dim, (((0,) * dim, 1),), (), ())

    @classmethod
    def full_space(cls, dim: int) -> "Polyhedron":
        return cls.from_halfspaces([], dim)

    @classmethod
    def nonnegative_orthant(cls, dim: int) -> "Polyhedron":
        unit = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
        return cls.from_generators([(0,) * dim], unit, dim=dim)

    # -- representation access -------------------------------------------------

    @property
    def halfspaces(self) -> Tuple[Constraint, ...]:
        return self._hrep

    @property
    def vertices(self) -> Tuple[Vertex, ...]:
        return self._vertices

    @property
    def rays(self) -> Tuple[IntVec, ...]:
        return self._rays

    @property
    def has_hrep(self) -> bool:
        return True

    @property
    def has_vrep(self) -> bool:
        return True

    def convert(self) -> "Polyhedron":
        """Both representations are materialized at construction; idempotent."""
        return self

    @property
    def is_empty(self) -> bool:
        return not self._vertices

    def is_cone(self) -> bool:
        zero = (Fraction(0),) * self.dim
        return self._vertices == (zero,)

    def __repr__(self) -> str:
        if self.is_empty:
            return f"Polyhedron.empty({self.dim})"
        return (
            f"Polyhedron(dim={self.dim}, vertices={len(self._vertices)}, "
            f"rays={len(self._rays)}, facets={len(self._hrep)})"
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polyhedron):
            return NotImplemented
        return (
            self.dim == other.dim
            and self._hrep == other._hrep
            and self._vertices == other._vertices
            and self._rays == other._rays
        )

    def __hash__(self):
        return hash((self.dim, self._hrep, self._vertices, self._rays))

    # -- predicates ------------------------------------------------------------

    def contains_point(self, x: Sequence) -> bool:
        x = tuple(Fraction(v) for v in x)
        if len(x) != self.dim:
            raise ValueError("point dimension mismatch")
        if self.is_empty:
            return False
        return all(dot(a, x) >= b for a, b in self._hrep)

    def contains_set(self, other: "Polyhedron") -> bool:
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        for v in other._vertices:
            if any(dot(a, v) < b for a, b in self._hrep):
                return False
        for r in other._rays:
            if any(dot(a, r) < 0 for a, b in self._hrep):
                return False
        return True

    def set_equal(self, other: "Polyhedron") -> bool:
        return self.contains_set(other) and other.contains_set(self)

    def separating_direction(self, x: Sequence):
        """A violated constraint (a, b) with a.x < b, or None if x is inside."""
        x = tuple(Fraction(v) for v in x)
        for a, b in self._hrep:
            if dot(a, x) < b:
                return a, b
        return None

    # -- operations ------------------------------------------------------------

    def minkowski_sum(self, other: "Polyhedron") -> "Polyhedron":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        if self.is_empty or other.is_empty:
            return Polyhedron.empty(self.dim)
        verts = [
            tuple(x + y for x, y in zip(v, w))
            for v in self._vertices
            for w in other._vertices
        ]
        rays = list(self._rays) + list(other._rays)
        return Polyhedron.from_generators(verts, rays, dim=self.dim)

    def __add__(self, other):
        if isinstance(other, Polyhedron):
            return self.minkowski_sum(other)
        return NotImplemented

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        rows = [(a, b) for a, b in self._hrep] + [(a, b) for a, b in other._hrep]
        return Polyhedron.from_halfspaces(rows, self.dim)

    def project(self, coords: Sequence[int]) -> "Polyhedron":
        """Image under the coordinate projection x -> (x[c] for c in coords)."""
        coords = list(coords)
        if not coords or any(c < 0 or c >= self.dim for c in coords):
            raise ValueError("invalid coordinate subset")
        if self.is_empty:
            return Polyhedron.empty(len(coords))
        verts = [tuple(v[c] for c in coords) for v in self._vertices]
        rays = [tuple(r[c] for c in coords) for r in self._rays]
        return Polyhedron.from_generators(verts, rays, dim=len(coords))

    def support_value(self, direction: Sequence) -> ExtRat:
        """inf of direction . x over the polyhedron (-inf if unbounded below)."""
        d = tuple(Fraction(v) for v in direction)
        if len(d) != self.dim:
            raise ValueError("direction dimension mismatch")
        if self.is_empty:
            raise ValueError("support value of an empty polyhedron")
        if any(dot(d, r) < 0 for r in self._rays):
            return NEG_INF
        return ExtRat.finite(min(dot(d, v) for v in self._vertices))

    def recession_cone(self) -> "Polyhedron":
        if self.is_empty:
            raise ValueError("recession cone of an empty polyhedron")
        return Polyhedron.from_halfspaces([(a, 0) for a, _ in self._hrep], self.dim)

    def translate(self, v: Sequence) -> "Polyhedron":
        v = tuple(Fraction(x) for x in v)
        if len(v) != self.dim:
            raise ValueError("translation dimension mismatch")
        if self.is_empty:
            return self
        verts = sorted(tuple(x + y for x, y in zip(p, v)) for p in self._vertices)
        hrep = sorted(primitive(a + (Fraction(b) + dot(a, v),)) for a, b in self._hrep)
        return Polyhedron._build(
            self.dim, [(row[:-1], row[-1]) for row in hrep], verts, self._rays
        )

    def scale(self, factor) -> "Polyhedron":
        """Elementwise positive scaling {factor * x : x in P}."""
        f = Fraction(factor)
        if f <= 0:
            raise ValueError("scale factor must be positive")
        if self.is_empty:
            return self
        verts = sorted(tuple(f * x for x in p) for p in self._vertices)
        hrep = sorted(primitive(a + (Fraction(b) * f,)) for a, b in self._hrep)
        return Polyhedron._build(
            self.dim, [(row[:-1], row[-1]) for row in hrep], verts, self._rays
        )

    def linear_image(self, matrix: Sequence[Sequence]) -> "Polyhedron":
        """Image {M x : x in P} for M given as rows."""
        rows = [tuple(Fraction(x) for x in r) for r in matrix]
        k = len(rows)
        if any(len(r) != self.dim for r in rows):
            raise ValueError("matrix width must equal polyhedron dimension")
        if self.is_empty:
            return Polyhedron.empty(k)
        verts = [tuple(dot(r, v) for r in rows) for v in self._vertices]
        rays = [tuple(dot(r, ray) for r in rows) for ray in self._rays]
        return Polyhedron.from_generators(verts, rays, dim=k)

    def linear_preimage(self, matrix: Sequence[Sequence], shift: Sequence = None) -> "Polyhedron":
        """Preimage {u : M u + shift in P} for M given as rows (n x k)."""
        rows = [tuple(Fraction(x) for x in r) for r in matrix]
        if len(rows) != self.dim:
            raise ValueError("matrix height must equal polyhedron dimension")
        k = len(rows[0]) if rows else 0
        if any(len(r) != k for r in rows):
            raise ValueError("ragged matrix")
        shift = tuple(Fraction(x) for x in shift) if shift is not None else (Fraction(0),) * self.dim
        out = []
        for a, b in self._hrep:
            coeffs = tuple(sum(a[i] * rows[i][j] for i in range(self.dim)) for j in range(k))
            out.append((coeffs, Fraction(b) - dot(a, shift)))
        return Polyhedron.from_halfspaces(out, k)

    def product(self, other: "Polyhedron") -> "Polyhedron":
        """Cartesian product, self coordinates first."""
        n, m = self.dim, other.dim
        rows = [(a + (0,) * m, b) for a, b in self._hrep]
        rows += [((0,) * n + a, b) for a, b in other._hrep]
        if self.is_empty or other.is_empty:
            return Polyhedron.empty(n + m)
        return Polyhedron.from_halfspaces(rows, n + m)


def positive_dual_cone(cone: Polyhedron) -> Polyhedron:
    """{v : g . v >= 0 for all g in C} for a polyhedral cone C."""
    if not cone.is_cone():
        raise ValueError("positive dual cone requires a cone")
    return Polyhedron.from_halfspaces([(r, 0) for r in cone.rays], cone.dim)


def project_halfspaces(
    constraints: Iterable[Tuple[Sequence, object]], dim: int, coords: Sequence[int]
) -> Polyhedron:
    """Project {x : a.x >= b} onto a coordinate subset without canonicalizing
    the (possibly high-dimensional) intermediate polyhedron."""
    coords = list(coords)
    rows, infeasible = _normalize_constraints(constraints, dim)
    if infeasible:
        return Polyhedron.empty(len(coords))
    vertices, rays = _h_to_v(rows, dim)
    if not vertices:
        return Polyhedron.empty(len(coords))
    verts = [tuple(v[c] for c in coords) for v in vertices]
    prays = [tuple(r[c] for c in coords) for r in rays]
    return Polyhedron.from_generators(verts, prays, dim=len(coords))

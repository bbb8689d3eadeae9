"""Rational polytopes: exact hull, duality, faces, lattice points, volume."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .lattice_core import (
    Vector,
    as_vector,
    content,
    coordinates,
    det,
    dot,
    double_description,
    is_integral,
    project_onto_span,
    rank,
    span_basis,
    vsub,
)

LATTICES = ("M", "N", "M'", "N'")


class PolytopeError(ValueError):
    pass


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull (-1 for no points)."""
    if not points:
        return -1
    p0 = points[0]
    return rank([vsub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


@dataclass(frozen=True)
class Face:
    """A nonempty face of a polytope, stored by its vertices."""

    vertices: tuple
    dim: int
    parent: "Polytope" = field(repr=False, compare=False, hash=False)

    def contains_points(self, points: Iterable[Sequence]) -> bool:
        verts = set(self.vertices)
        return all(as_vector(p) in verts for p in points)

    def polytope(self) -> "Polytope":
        return hull(self.vertices, lattice=self.parent.lattice)


class Polytope:
    """A bounded rational polytope with both representations.

    Facets are pairs ``(normal, offset)`` meaning ``<normal, x> >= -offset``.
    For lower-dimensional polytopes the facets are taken inside the affine
    hull (normals projected onto its direction space) and ``equations``
    lists ``(normal, offset)`` pairs with ``<normal, x> == -offset``.
    """

    def __init__(self, vertices, facets, equations, lattice=None, name=None):
        self.vertices: tuple = tuple(sorted(as_vector(v) for v in vertices))
        self.facets: tuple = tuple(sorted(facets))
        self.equations: tuple = tuple(equations)
        self.ambient_dim = len(self.vertices[0])
        self.dim = self.ambient_dim - len(self.equations)
        self.lattice = lattice
        self.name = name

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return (f"<Polytope{label} dim={self.dim} in {self.ambient_dim}-space,"
                f" {len(self.vertices)} vertices, {len(self.facets)} facets>")

    def __eq__(self, other):
        if not isinstance(other, Polytope):
            return NotImplemented
        return self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def inequalities(self) -> list[tuple[Vector, Fraction | int]]:
        """All facets plus each equation as a pair of opposite inequalities."""
        out = list(self.facets)
        for n, c in self.equations:
            out.append((n, c))
            out.append((tuple(-x for x in n), -c))
        return out

    def is_full_dimensional(self) -> bool:
        return self.dim == self.ambient_dim

    def tight_facets(self, x: Sequence) -> frozenset:
        return frozenset(i for i, (n, c) in enumerate(self.facets) if dot(n, x) + c == 0)

    @cached_property
    def _face_sets(self) -> dict[frozenset, int]:
        index = {v: i for i, v in enumerate(self.vertices)}
        facet_sets = [
            frozenset(index[v] for v in self.vertices if dot(n, v) + c == 0)
            for n, c in self.facets
        ]
        whole = frozenset(range(len(self.vertices)))
        found = {whole}
        frontier = [whole]
        while frontier:
            nxt = []
            for f in frontier:
                for g in facet_sets:
                    h = f & g
                    if h and h not in found:
                        found.add(h)
                        nxt.append(h)
            frontier = nxt
        return {f: affine_rank([self.vertices[i] for i in sorted(f)]) for f in found}

    def all_faces(self) -> list[Face]:
        """Every nonempty face including the polytope itself, sorted by
        dimension then vertex list."""
        out = [
            Face(tuple(self.vertices[i] for i in sorted(f)), d, self)
            for f, d in self._face_sets.items()
        ]
        return sorted(out, key=lambda f: (f.dim, f.vertices))

    def faces(self, d: int) -> list[Face]:
        """All faces of dimension ``d`` (0 <= d < dim)."""
        if not 0 <= d < self.dim:
            raise PolytopeError(f"face dimension {d} out of range for a {self.dim}-polytope")
        return [f for f in self.all_faces() if f.dim == d]

    def face_of(self, points: Iterable[Sequence]) -> Face:
        """Smallest face containing the given points."""
        pts = [as_vector(p) for p in points]
        best = None
        for f in self.all_faces():
            if all(_in_face(f, p) for p in pts) and (best is None or f.dim < best.dim):
                best = f
        return best

    def contains(self, x: Sequence) -> bool:
        return contains(self, x)

    def lattice_points(self) -> list[Vector]:
        return lattice_points(self)

    def volume(self) -> Fraction:
        """Euclidean volume in its own ambient coordinates (0 unless full)."""
        if self.dim < self.ambient_dim:
            return Fraction(0)
        total = Fraction(0)
        k = self.dim
        for simplex in pulling_triangulation(self):
            v0 = simplex[0]
            total += abs(Fraction(det([vsub(v, v0) for v in simplex[1:]])))
        return total / math.factorial(k)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lattice": self.lattice,
            "vertices": [[_json_num(x) for x in v] for v in self.vertices],
        }


def _json_num(x):
    if isinstance(x, Fraction) and x.denominator != 1:
        return [x.numerator, x.denominator]
    return int(x)


def _in_face(face: Face, p) -> bool:
    # a point lies in a face iff it is in the polytope and tight wherever
    # every vertex of the face is tight
    parent = face.parent
    if not contains(parent, p):
        return False
    for n, c in parent.facets:
        if all(dot(n, v) + c == 0 for v in face.vertices) and dot(n, p) + c != 0:
            return False
    return True


def hull(points: Iterable[Sequence], lattice: str | None = None,
         name: str | None = None) -> Polytope:
    """Convex hull of a finite point set, with irredundant V- and H-rep."""
    pts = sorted({as_vector(p) for p in points})
    if not pts:
        raise PolytopeError("hull of an empty point set")
    d = len(pts[0])
    if any(len(p) != d for p in pts):
        raise PolytopeError("points have different dimensions")
    lifted = [tuple(p) + (1,) for p in pts]
    lines, rays = double_description(lifted, dim=d + 1)
    base = pts[0]
    directions = [vsub(p, base) for p in pts[1:]]
    full = len(lines) == 0
    equations = []
    for l in lines:
        n, c = l[:d], l[d]
        g = content(n)
        equations.append((tuple(x // g for x in n), Fraction(c, g)))
    facets = []
    dim = d - len(lines)
    for r in rays:
        n, c = r[:d], r[d]
        if not any(n):
            continue
        tight = [p for p in pts if dot(n, p) + c == 0]
        if not tight or dim == 0:
            continue
        if not full:
            n = project_onto_span(n, directions)
            if not any(n):
                continue
            c = -dot(n, tight[0])
            g = content(n)
            n, c = tuple(x // g for x in n), Fraction(c, g)
        else:
            g = content(n)
            n, c = tuple(x // g for x in n), Fraction(c, g)
        facets.append((n, c.numerator if c.denominator == 1 else c))
    facets = sorted(set(facets))
    if dim == 0:
        return Polytope(pts, [], equations, lattice, name)
    # a point is a vertex iff its tight facets (plus equations) pin it down
    eq_normals = [n for n, _ in equations]
    verts = [
        p for p in pts
        if rank([n for n, c in facets if dot(n, p) + c == 0] + eq_normals) == d
    ]
    return Polytope(verts, facets, equations, lattice, name)


def from_inequalities(ineqs: Sequence[tuple], eqs: Sequence[tuple] = (),
                      dim: int | None = None, lattice=None, name=None) -> Polytope | None:
    """Polytope ``{x : <n,x> >= -c, <e,x> == -f}``; ``None`` if empty.

    Raises :class:`PolytopeError` when the set is unbounded.
    """
    some = list(ineqs) or list(eqs)
    if dim is None:
        dim = len(some[0][0])
    rows = [tuple(n) + (c,) for n, c in ineqs]
    rows.append((0,) * dim + (1,))
    erows = [tuple(n) + (c,) for n, c in eqs]
    lines, rays = double_description(rows, erows, dim=dim + 1)
    if lines:
        raise PolytopeError("inequality system is unbounded")
    pts = []
    for r in rays:
        if r[dim] == 0:
            raise PolytopeError("inequality system is unbounded")
        t = r[dim]
        pts.append(as_vector(Fraction(x, t) for x in r[:dim]))
    if not pts:
        return None
    return hull(pts, lattice=lattice, name=name)


def dual(p: Polytope, lattice: str | None = None) -> Polytope:
    """The polar dual ``{v : <v, x> >= -1 for all x in p}``."""
    if not p.is_full_dimensional():
        raise PolytopeError("dual requires a full-dimensional polytope")
    if any(c <= 0 for _, c in p.facets):
        raise PolytopeError("origin is not strictly interior")
    verts = [as_vector(Fraction(x) / c for x in n) for n, c in p.facets]
    if lattice is None and p.lattice in LATTICES:
        lattice = {"M": "N", "N": "M", "M'": "N'", "N'": "M'"}[p.lattice]
    return hull(verts, lattice=lattice)


def origin_interior(p: Polytope) -> bool:
    return p.is_full_dimensional() and all(c > 0 for _, c in p.facets)


def is_reflexive(p: Polytope) -> bool:
    if not all(is_integral(v) for v in p.vertices):
        return False
    if not origin_interior(p):
        return False
    return all(is_integral(v) for v in dual(p).vertices)


def contains(p: Polytope, x: Sequence) -> bool:
    if len(x) != p.ambient_dim:
        raise PolytopeError("dimension mismatch")
    return (all(dot(n, x) + c >= 0 for n, c in p.facets)
            and all(dot(n, x) + c == 0 for n, c in p.equations))


def is_subset(p: Polytope, q: Polytope) -> bool:
    if p.ambient_dim != q.ambient_dim:
        raise PolytopeError("dimension mismatch")
    return all(contains(q, v) for v in p.vertices)


def lattice_points(p: Polytope) -> list[Vector]:
    """All integral points, lexicographically sorted (bounding-box scan)."""
    lo = [math.floor(min(v[i] for v in p.vertices)) for i in range(p.ambient_dim)]
    hi = [math.ceil(max(v[i] for v in p.vertices)) for i in range(p.ambient_dim)]
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    return [x for x in itertools.product(*ranges) if contains(p, x)]


def interior_lattice_points(p: Polytope) -> list[Vector]:
    return [x for x in lattice_points(p) if all(dot(n, x) + c > 0 for n, c in p.facets)]


def boundary_lattice_points(p: Polytope) -> list[Vector]:
    return [x for x in lattice_points(p) if any(dot(n, x) + c == 0 for n, c in p.facets)]


def pulling_triangulation(p: Polytope) -> list[tuple]:
    """Triangulation by recursively pulling the lexicographically smallest
    vertex of each face.  Returns simplices as vertex tuples."""
    faces = p._face_sets
    verts = p.vertices

    def facets_of(f, d):
        return [g for g, dg in faces.items() if dg == d - 1 and g < f]

    def tri(f, d):
        if d == 0:
            return [(min(f),)]
        v0 = min(f)
        out = []
        for g in facets_of(f, d):
            if v0 in g:
                continue
            for s in tri(g, d - 1):
                out.append((v0,) + s)
        return out

    whole = frozenset(range(len(verts)))
    return [tuple(verts[i] for i in s) for s in tri(whole, p.dim)]


def relative_volume(p: Polytope, basis: Sequence[Sequence]) -> Fraction:
    """Volume of ``p`` measured in coordinates of a basis of a linear
    subspace containing it (zero if ``p`` is lower-dimensional there)."""
    if p.dim < len(basis):
        return Fraction(0)
    coords = [coordinates(basis, v) for v in p.vertices]
    return hull(coords).volume()


def translate_and_basis(points: Sequence[Sequence]) -> list[Vector]:
    """Integer basis of the direction space of the affine hull."""
    p0 = points[0]
    return span_basis([vsub(p, p0) for p in points[1:]])


def intersect(p: Polytope, ineqs=(), eqs=()) -> Polytope | None:
    """``p`` cut by extra constraints ``<n,x> >= -c`` / ``<e,x> == -f``."""
    return from_inequalities(list(p.facets) + list(ineqs),
                             list(p.equations) + list(eqs), dim=p.ambient_dim)

"""Rational polyhedral cones, fans, piecewise linear functions and nef
partitions."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .lattice_core import (
    Vector,
    as_vector,
    cone_facets,
    dot,
    double_description,
    primitive,
    rank,
    solve,
    transpose,
)
from .polytope import Face, Polytope, PolytopeError, _in_face, from_inequalities, lattice_points


class FanError(ValueError):
    pass


class DegenerateConeError(FanError):
    """A maximal cone does not determine a unique linear piece."""


class Cone:
    """A pointed rational polyhedral cone given by generators.

    Generators are reduced to primitive, irredundant ray generators on
    construction.  The H-representation (``equations`` spanning the
    orthogonal complement, inward ``facet_normals`` inside the span) is
    computed lazily.
    """

    __slots__ = ("rays", "ambient_dim", "__dict__")

    def __init__(self, generators: Iterable[Sequence], ambient_dim: int | None = None,
                 irredundant: bool = False):
        gens = sorted({primitive(g) for g in generators if any(g)})
        if ambient_dim is None:
            if not gens:
                raise FanError("ambient dimension required for the zero cone")
            ambient_dim = len(gens[0])
        self.ambient_dim = ambient_dim
        if not irredundant and len(gens) > 1:
            eqs, normals = cone_facets(gens, ambient_dim)
            if rank(list(normals) + list(eqs)) < ambient_dim:
                raise FanError("cone is not pointed")
            self.__dict__["_hrep"] = (eqs, normals)
            gens = [g for g in gens
                    if rank([n for n in normals if dot(n, g) == 0] + eqs) == ambient_dim - 1]
        self.rays: tuple = tuple(gens)

    @classmethod
    def from_inequalities(cls, ineqs, eqs=(), ambient_dim=None) -> "Cone":
        lines, rays = double_description(ineqs, eqs, dim=ambient_dim)
        if lines:
            raise FanError("cone is not pointed")
        dim = ambient_dim or len((list(ineqs) or list(eqs))[0])
        return cls(rays, dim, irredundant=True)

    @cached_property
    def _hrep(self):
        if not self.rays:
            return [tuple(int(i == j) for j in range(self.ambient_dim))
                    for i in range(self.ambient_dim)], []
        return cone_facets(self.rays, self.ambient_dim)

    @property
    def equations(self) -> list[Vector]:
        return self._hrep[0]

    @property
    def facet_normals(self) -> list[Vector]:
        return self._hrep[1]

    @cached_property
    def dim(self) -> int:
        return rank(self.rays) if self.rays else 0

    @property
    def key(self) -> frozenset:
        return frozenset(self.rays)

    def __eq__(self, other):
        return isinstance(other, Cone) and self.rays == other.rays

    def __hash__(self):
        return hash(self.rays)

    def __repr__(self):
        return f"Cone(dim={self.dim}, rays={list(self.rays)})"

    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def contains(self, x: Sequence) -> bool:
        return (all(dot(e, x) == 0 for e in self.equations)
                and all(dot(n, x) >= 0 for n in self.facet_normals))

    def contains_cone(self, other: "Cone") -> bool:
        return all(self.contains(r) for r in other.rays)

    def in_relative_interior(self, x: Sequence) -> bool:
        return (all(dot(e, x) == 0 for e in self.equations)
                and all(dot(n, x) > 0 for n in self.facet_normals))

    @cached_property
    def face_ray_sets(self) -> frozenset:
        """Ray sets of all faces, including the cone itself and ``{0}``."""
        whole = frozenset(self.rays)
        if self.dim == 0:
            return frozenset({whole})
        facet_sets = [frozenset(r for r in self.rays if dot(n, r) == 0)
                      for n in self.facet_normals]
        found = {whole}
        frontier = [whole]
        while frontier:
            nxt = []
            for f in frontier:
                for g in facet_sets:
                    h = f & g
                    if h not in found:
                        found.add(h)
                        nxt.append(h)
            frontier = nxt
        found.add(frozenset())
        return frozenset(found)

    def faces(self) -> list["Cone"]:
        return [Cone(sorted(s), self.ambient_dim, irredundant=True)
                for s in sorted(self.face_ray_sets, key=lambda s: (len(s), sorted(s)))]

    def facets(self) -> list["Cone"]:
        return [f for f in self.faces() if f.dim == self.dim - 1]

    def has_face(self, ray_set: Iterable) -> bool:
        return frozenset(ray_set) in self.face_ray_sets

    def intersection(self, other: "Cone") -> "Cone":
        ineqs = list(self.facet_normals) + list(other.facet_normals)
        eqs = list(self.equations) + list(other.equations)
        if not ineqs and not eqs:
            return Cone([], self.ambient_dim)
        return Cone.from_inequalities(ineqs, eqs, self.ambient_dim)

    def dual_contains(self, m: Sequence) -> bool:
        """Whether ``m`` is nonnegative on the cone."""
        return all(dot(m, r) >= 0 for r in self.rays)


def cone_from_key(key: Iterable, ambient_dim: int) -> Cone:
    return Cone(sorted(key), ambient_dim, irredundant=True)


class Fan:
    """A fan stored by its maximal cones; lower cones are derived lazily."""

    def __init__(self, maximal_cones: Iterable[Cone], ambient_dim: int, name: str | None = None,
                 polytope: Polytope | None = None, cone_faces: Mapping | None = None):
        cones = {c.key: c for c in maximal_cones}
        # drop cones that are faces of others
        keys = sorted(cones, key=len, reverse=True)
        maximal = []
        for k in keys:
            if not any(k < m.key and m.has_face(k) for m in maximal):
                maximal.append(cones[k])
        self.maximal_cones: list[Cone] = sorted(maximal, key=lambda c: c.rays)
        self.ambient_dim = ambient_dim
        self.name = name
        self.polytope = polytope
        # for face fans: cone key -> the polytope face it is the cone over
        self.cone_faces = dict(cone_faces or {})

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return (f"<Fan{label} in {self.ambient_dim}-space, {len(self.rays)} rays,"
                f" {len(self.maximal_cones)} maximal cones>")

    @cached_property
    def rays(self) -> tuple:
        return tuple(sorted({r for c in self.maximal_cones for r in c.rays}))

    @cached_property
    def all_cones(self) -> list[Cone]:
        keys = {}
        for c in self.maximal_cones:
            for s in c.face_ray_sets:
                keys.setdefault(s, None)
        return [cone_from_key(k, self.ambient_dim)
                for k in sorted(keys, key=lambda s: (len(s), sorted(s)))]

    def cones(self, dim: int | None = None) -> list[Cone]:
        if dim is None:
            return list(self.all_cones)
        return [c for c in self.all_cones if c.dim == dim]

    def has_cone(self, c: Cone | Iterable) -> bool:
        key = c.key if isinstance(c, Cone) else frozenset(c)
        return any(m.has_face(key) for m in self.maximal_cones if key <= m.key)

    def contains(self, x: Sequence) -> bool:
        return any(c.contains(x) for c in self.maximal_cones)

    def cone_containing(self, x: Sequence) -> Cone | None:
        """Smallest cone of the fan containing ``x`` (``None`` outside)."""
        best = None
        for c in self.maximal_cones:
            if c.contains(x):
                for f in c.faces():
                    if f.contains(x) and (best is None or f.dim < best.dim):
                        best = f
        return best

    def is_simplicial(self) -> bool:
        return all(c.is_simplicial() for c in self.maximal_cones)

    def is_complete(self, samples: int = 1000, seed: int = 0) -> bool:
        """Every sampled rational direction lies in some maximal cone.

        Directions come from a seeded generator, so the check is
        deterministic.
        """
        rng = random.Random(seed)
        for _ in range(samples):
            x = tuple(Fraction(rng.randint(-1000, 1000), rng.randint(1, 97))
                      for _ in range(self.ambient_dim))
            if any(x) and not self.contains(x):
                return False
        return True

    def validate(self, pairs: Iterable[tuple[int, int]] | None = None) -> list[tuple]:
        """Check that cones meet in common faces.

        Returns the list of offending index pairs (empty when valid).  By
        default every pair of maximal cones is examined.
        """
        cones = self.maximal_cones
        if pairs is None:
            pairs = itertools.combinations(range(len(cones)), 2)
        bad = []
        for i, j in pairs:
            if not cones_meet_in_face(cones[i], cones[j]):
                bad.append((i, j))
        return bad

    def to_json(self) -> dict:
        index = {r: i for i, r in enumerate(self.rays)}
        return {
            "name": self.name,
            "ambient_dim": self.ambient_dim,
            "rays": [list(r) for r in self.rays],
            "maximal_cones": [sorted(index[r] for r in c.rays) for c in self.maximal_cones],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Fan":
        rays = [as_vector(r) for r in data["rays"]]
        dim = data["ambient_dim"]
        for r in rays:
            if len(r) != dim or primitive(r) != r:
                raise FanError(f"ray {r} is not a primitive vector in dimension {dim}")
        cones = [Cone([rays[i] for i in idx], dim) for idx in data["maximal_cones"]]
        for c, idx in zip(cones, data["maximal_cones"]):
            if len(c.rays) != len(idx):
                raise FanError(f"redundant generators in cone {idx}")
        return cls(cones, dim, name=data.get("name"))


def cones_meet_in_face(a: Cone, b: Cone) -> bool:
    """Whether ``a`` and ``b`` intersect in a face of each."""
    ik = a.intersection(b).key
    return a.has_face(ik) and b.has_face(ik)


def face_fan(p: Polytope, name: str | None = None) -> Fan:
    """The complete fan of cones over the proper faces of ``p``."""
    if not p.is_full_dimensional() or any(c <= 0 for _, c in p.facets):
        raise FanError("face fan needs the origin in the interior")
    cones = []
    cone_faces = {}
    for face in p.all_faces():
        if face.dim == p.dim:
            continue
        c = Cone(face.vertices, p.ambient_dim)
        cone_faces[c.key] = face
        if face.dim == p.dim - 1:
            cones.append(c)
    return Fan(cones, p.ambient_dim, name=name, polytope=p, cone_faces=cone_faces)


def _contains_item(face: Face, item: Sequence[Sequence]) -> bool:
    # a convex face contains a segment iff it contains both endpoints
    return all(_in_face(face, pt) for pt in item)


def subfan_excluding(f: Fan, forbidden: Sequence[Sequence[Sequence]], name=None) -> Fan:
    """Subfan of a face fan keeping cones over faces that contain none of
    the forbidden point sets."""
    p = f.polytope
    if p is None:
        raise FanError("subfan_excluding needs a face fan")
    items = [[as_vector(x) for x in item] for item in forbidden]
    for item in items:
        for x in item:
            if not p.contains(x):
                raise FanError(f"forbidden point {x} is not in the support")
    if not items:
        return f
    kept = {}
    for key, face in f.cone_faces.items():
        if not any(_contains_item(face, item) for item in items):
            kept[key] = face
    cones = [cone_from_key(k, f.ambient_dim) for k in kept]
    return Fan(cones, f.ambient_dim, name=name, polytope=p, cone_faces=kept)


# ---------------------------------------------------------------------------
# Piecewise linear functions


@dataclass
class PLFunction:
    """A function linear on each cone of ``fan``, given by ray values.

    The convention follows the Newton polytope: on a cone ``s`` the
    function equals ``-<m_s, x>`` where ``m_s`` is the linear piece.
    """

    fan: Fan
    ray_values: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ray_values = {as_vector(r): Fraction(v) for r, v in self.ray_values.items()}
        missing = [r for r in self.fan.rays if r not in self.ray_values]
        if missing:
            raise FanError(f"no value for rays {missing[:3]}...")

    @classmethod
    def from_point_values(cls, fan: Fan, values: Mapping, default=0) -> "PLFunction":
        """Values given at (possibly non-primitive) points on rays; rays not
        mentioned get ``default``."""
        rv = {r: Fraction(default) for r in fan.rays}
        for pt, val in values.items():
            pt = as_vector(pt)
            prim = primitive(pt)
            k = next(a // b for a, b in zip(pt, prim) if b)
            rv[prim] = Fraction(val) / k
        return cls(fan, rv)

    @classmethod
    def support_function(cls, fan: Fan, p: Polytope) -> "PLFunction":
        """Value 1 on the boundary of ``p`` (rays through boundary points)."""
        rv = {}
        for r in fan.rays:
            # the gauge of p at r: max t with t*r in p, value 1/t
            t = min(Fraction(c) / -dot(n, r) for n, c in p.facets if dot(n, r) < 0)
            rv[r] = 1 / t
        return cls(fan, rv)

    def __call__(self, x: Sequence) -> Fraction:
        c = self.fan.cone_containing(x)
        if c is None:
            raise FanError(f"{x} is outside the support")
        if c.dim == 0:
            return Fraction(0)
        coef = solve(transpose(c.rays), x)
        return sum(Fraction(a) * self.ray_values[r] for a, r in zip(coef, c.rays))

    def linear_piece(self, cone: Cone) -> Vector:
        """``m`` with ``<m, r> = -phi(r)`` on the rays of a full cone."""
        if cone.dim != self.fan.ambient_dim:
            raise DegenerateConeError(f"{cone} is not full-dimensional")
        m = solve(cone.rays, [-self.ray_values[r] for r in cone.rays])
        if m is None:
            raise DegenerateConeError(f"function is not linear on {cone}")
        return m

    def margins(self, pieces: Mapping | None = None) -> dict:
        """``<m_s, r> + phi(r)`` for every maximal cone ``s`` and ray ``r``
        not in ``s``.  ``pieces`` may supply ``m_s`` (needed for maximal
        cones that are not full-dimensional)."""
        out = {}
        for c in self.fan.maximal_cones:
            m = pieces[c.key] if pieces is not None and c.key in pieces else self.linear_piece(c)
            for r in c.rays:
                if dot(m, r) != -self.ray_values[r]:
                    raise FanError(f"piece for {c} does not interpolate the function")
            for r in self.fan.rays:
                if r not in c.key:
                    out[(c.key, r)] = dot(m, r) + self.ray_values[r]
        return out

    def is_convex(self, pieces: Mapping | None = None) -> bool:
        return all(v >= 0 for v in self.margins(pieces).values())

    def is_strictly_convex(self, pieces: Mapping | None = None) -> bool:
        return all(v > 0 for v in self.margins(pieces).values())

    def to_json(self) -> dict:
        return {"ray_values": {",".join(map(str, r)): [v.numerator, v.denominator]
                               for r, v in sorted(self.ray_values.items())}}


def is_convex(phi: PLFunction) -> bool:
    return phi.is_convex()


def is_strictly_convex(phi: PLFunction) -> bool:
    return phi.is_strictly_convex()


def newton_polytope(phi: PLFunction, lattice: str | None = None) -> Polytope:
    """``{u : <u, v> >= -phi(v) for every ray v}``."""
    ineqs = [(r, phi.ray_values[r]) for r in phi.fan.rays]
    try:
        newt = from_inequalities(ineqs, dim=phi.fan.ambient_dim, lattice=lattice)
    except PolytopeError as exc:
        raise FanError("Newton polytope is unbounded") from exc
    if newt is None:
        raise FanError("Newton polytope is empty")
    return newt


def orbit_section_analysis(face, newt: Polytope, phi: PLFunction) -> tuple[list, list]:
    """Split lattice points of ``newt`` into monomial sections that are
    nowhere vanishing on the orbit of the cone over ``face`` and those that
    vanish identically there.

    ``face`` may be a :class:`Face`, a vertex list, or ``None`` / ``()`` for
    the open torus.
    """
    verts = [] if face is None else list(face.vertices if isinstance(face, Face) else face)
    values = {}
    for v in verts:
        v = as_vector(v)
        prim = primitive(v)
        k = next(a // b for a, b in zip(v, prim) if b)
        values[v] = phi.ray_values[prim] * k
    nonvanishing, vanishing = [], []
    for m in lattice_points(newt):
        if all(dot(m, v) == -values[v] for v in values):
            nonvanishing.append(m)
        else:
            vanishing.append(m)
    return nonvanishing, vanishing


@dataclass
class NefPartition:
    parts: list

    @property
    def E_sets(self) -> list[list[Vector]]:
        return [sorted(r for r, v in part.ray_values.items() if v == 1) for part in self.parts]


def nef_partition_check(np_: NefPartition) -> bool:
    """Each part convex, 0/1-valued on rays, and the parts sum to 1."""
    fan = np_.parts[0].fan
    for part in np_.parts:
        if part.fan is not fan:
            return False
        if any(v not in (0, 1) for v in part.ray_values.values()):
            return False
        if not part.is_convex():
            return False
    return all(sum(part.ray_values[r] for part in np_.parts) == 1 for r in fan.rays)


def amenable_check(v: Sequence, np_: NefPartition) -> bool:
    """``<v, u> = -1`` on the first vertex class and ``>= 0`` on the second."""
    e1, e2 = np_.E_sets[0], np_.E_sets[1]
    return all(dot(v, u) == -1 for u in e1) and all(dot(v, u) >= 0 for u in e2)

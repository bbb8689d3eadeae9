"""Integer lattice maps and their compatibility with fans."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .fan import Cone, Fan
from .lattice_core import (
    Matrix,
    Vector,
    as_matrix,
    dot,
    integer_kernel,
    integer_solve,
    is_unimodular,
    matmul,
    matvec,
    nullspace,
    span_basis,
    transpose,
)
from .polytope import Face, Polytope, from_inequalities, hull, relative_volume


class MorphismError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeMap:
    """An integer matrix acting on column vectors (target_dim x source_dim)."""

    matrix: Matrix
    source: str | None = None
    target: str | None = None
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix))
        if any(not isinstance(x, int) for row in self.matrix for x in row):
            raise MorphismError("lattice maps must have integer entries")

    @property
    def source_dim(self) -> int:
        return len(self.matrix[0])

    @property
    def target_dim(self) -> int:
        return len(self.matrix)

    def __call__(self, v: Sequence) -> Vector:
        if len(v) != self.source_dim:
            raise MorphismError("dimension mismatch")
        return matvec(self.matrix, v)

    def transpose(self) -> "LatticeMap":
        return LatticeMap(transpose(self.matrix), self.target and _dual_tag(self.target),
                          self.source and _dual_tag(self.source))

    def kernel(self) -> list[Vector]:
        return integer_kernel(self.matrix)

    def pull_normal(self, n: Sequence) -> Vector:
        """The functional ``n o self`` on the source."""
        return tuple(dot(n, col) for col in zip(*self.matrix))

    def image_cone(self, c: Cone) -> Cone:
        return Cone([self(r) for r in c.rays], self.target_dim)

    def preimage_cone_constraints(self, c: Cone) -> tuple[list, list]:
        return ([self.pull_normal(n) for n in c.facet_normals],
                [self.pull_normal(e) for e in c.equations])

    def to_json(self) -> dict:
        return {"name": self.name, "matrix": [list(r) for r in self.matrix],
                "source": self.source, "target": self.target}

    @classmethod
    def from_json(cls, data: Mapping) -> "LatticeMap":
        return cls(as_matrix(data["matrix"]), data.get("source"), data.get("target"),
                   data.get("name"))


def _dual_tag(tag: str) -> str:
    return {"M": "N", "N": "M", "M'": "N'", "N'": "M'"}.get(tag, tag)


def image_polytope(m: LatticeMap, p: Polytope) -> Polytope:
    if p.ambient_dim != m.source_dim:
        raise MorphismError("dimension mismatch")
    return hull([m(v) for v in p.vertices], lattice=m.target)


def fan_morphism_exists(m: LatticeMap, source: Fan, target: Fan) -> tuple[bool, Cone | None]:
    """Whether every source cone maps into some target cone.

    Returns ``(True, None)`` or ``(False, counterexample_cone)``.
    """
    if source.ambient_dim != m.source_dim or target.ambient_dim != m.target_dim:
        raise MorphismError("dimension mismatch")
    for c in source.maximal_cones:
        images = [m(r) for r in c.rays]
        if not any(all(t.contains(x) for x in images) for t in target.maximal_cones):
            return False, c
    return True, None


def _cube_constraints(dim: int, bound: int = 1) -> list[tuple]:
    out = []
    for i in range(dim):
        e = tuple(int(i == j) for j in range(dim))
        out.append((e, bound))
        out.append((tuple(-x for x in e), bound))
    return out


def truncated_volume(c: Cone, basis: Sequence[Sequence]) -> Fraction:
    """Volume of ``c`` cut by the cube ``[-1, 1]^d``, measured in the
    coordinates of ``basis`` (a basis of a subspace containing ``c``)."""
    if c.dim < len(basis):
        return Fraction(0)
    ineqs = [(n, 0) for n in c.facet_normals] + _cube_constraints(c.ambient_dim)
    eqs = [(e, 0) for e in c.equations]
    p = from_inequalities(ineqs, eqs, dim=c.ambient_dim)
    return relative_volume(p, basis)


@dataclass
class CoveringResult:
    ok: bool
    image: Cone
    witness: list
    image_volume: Fraction
    covered_volume: Fraction

    def __bool__(self):
        return self.ok


def image_is_union_of_cones(m: LatticeMap, c: Cone, f: Fan) -> CoveringResult:
    """Whether ``m(c)`` is a union of cones of ``f``.

    The cones of ``f`` of the same dimension as the image and lying inside
    it are collected; since they have disjoint interiors, the image is
    their union exactly when their truncated volumes add up to the
    truncated volume of the image.
    """
    image = m.image_cone(c)
    k = image.dim
    if k == 0:
        return CoveringResult(True, image, [image], Fraction(0), Fraction(0))
    basis = span_basis(image.rays)
    pieces = [t for t in f.cones(k) if image.contains_cone(t)]
    total = truncated_volume(image, basis)
    covered = sum((truncated_volume(t, basis) for t in pieces), Fraction(0))
    return CoveringResult(total == covered and total > 0, image, pieces, total, covered)


@dataclass
class Section:
    face: Face
    polytope: Polytope | None

    @property
    def kind(self) -> str:
        p = self.polytope
        if p is None:
            return "empty"
        lattice = all(isinstance(x, int) for v in p.vertices for x in v)
        if p.dim == 0:
            return "point" if lattice else "non-lattice point"
        if p.dim == 1:
            return "segment" if lattice else "non-lattice segment"
        return f"{p.dim}-dimensional"

    @property
    def ok(self) -> bool:
        return self.kind in ("empty", "point", "segment")


def wedge_constraints(m: LatticeMap, ell: Sequence) -> tuple[list, list]:
    """H-representation of ``m^{-1}(R>=0 ell)`` as (inequalities, equations)
    of linear functionals on the source."""
    if not any(ell):
        raise MorphismError("the lattice point must be nonzero")
    perp = nullspace([tuple(ell)])
    eqs = [m.pull_normal(a) for a in perp]
    ineqs = [m.pull_normal(ell)]
    return ineqs, eqs


def preimage_ray_sections(m: LatticeMap, ell: Sequence, f: Fan, p: Polytope) -> list[Section]:
    """Intersect the wedge over the ray through ``ell`` with every face of
    ``p`` whose cone lies in ``f``.  Only nonempty sections are returned."""
    ineqs, eqs = wedge_constraints(m, ell)
    faces = {key: face for key, face in f.cone_faces.items()}
    if not faces:
        raise MorphismError("preimage_ray_sections needs a fan of cones over faces")
    wedge_ineqs = [(a, 0) for a in ineqs]
    wedge_eqs = [(e, 0) for e in eqs]
    out = []
    maximal = {c.key for c in f.maximal_cones}
    cache = {}
    for key in sorted(maximal, key=sorted):
        face = faces[key]
        tight = [(n, c) for n, c in p.facets if all(dot(n, v) + c == 0 for v in face.vertices)]
        cache[key] = from_inequalities(list(p.facets) + wedge_ineqs,
                                       [(n, c) for n, c in tight] + wedge_eqs,
                                       dim=p.ambient_dim)
    for key, face in sorted(faces.items(), key=lambda kv: (kv[1].dim, kv[1].vertices)):
        # a section of a subface is the face of a maximal section lying in it
        host = next(k for k in sorted(maximal, key=sorted) if key <= k)
        big = cache[host]
        if big is None:
            continue
        tight = [(n, c) for n, c in p.facets if all(dot(n, v) + c == 0 for v in face.vertices)]
        pts = [v for v in big.vertices if all(dot(n, v) + c == 0 for n, c in tight)]
        if pts:
            out.append(Section(face, hull(pts)))
    return out


def intersection_fan(m: LatticeMap, target: Fan, source: Fan, name=None) -> Fan:
    """Common refinement of ``source`` with the preimage of ``target``:
    all cones ``m^{-1}(C1) & C2`` of full dimension in ``C2``."""
    pieces = {}
    for c2 in source.maximal_cones:
        images = [m(r) for r in c2.rays]
        moving = [x for x in images if any(x)]
        for c1 in target.maximal_cones:
            # skip when a facet of c1 is violated by every non-kernel ray
            if moving and any(all(dot(n, x) < 0 for x in moving) for n in c1.facet_normals):
                continue
            ineqs, eqs = m.preimage_cone_constraints(c1)
            cone = Cone.from_inequalities(ineqs + list(c2.facet_normals),
                                          eqs + list(c2.equations), m.source_dim)
            if cone.dim == c2.dim:
                pieces[cone.key] = cone
    fan = Fan(pieces.values(), m.source_dim, name=name)
    return fan


def right_inverse(m: LatticeMap) -> Matrix:
    """Integer ``s`` with ``m s = I`` (requires ``m`` surjective on lattices)."""
    cols = []
    for i in range(m.target_dim):
        e = tuple(int(i == j) for j in range(m.target_dim))
        x = integer_solve(m.matrix, e)
        if x is None:
            raise MorphismError("map is not surjective onto the lattice")
        cols.append(x)
    return transpose(cols)


def symmetry_descends(L: LatticeMap, m: LatticeMap, fan: Fan | None = None) -> LatticeMap:
    """The map ``L'`` with ``L' m = m L``.

    Raises :class:`MorphismError` when ``L`` does not preserve the kernel of
    ``m`` or (if ``fan`` is given) does not permute the maximal cones.
    """
    if not is_unimodular(L.matrix):
        raise MorphismError("L must be unimodular")
    for k in m.kernel():
        if any(m(L(k))):
            raise MorphismError(f"kernel vector {k} is not preserved")
    lp = matmul(matmul(m.matrix, L.matrix), right_inverse(m))
    if matmul(lp, m.matrix) != matmul(m.matrix, L.matrix):
        raise MorphismError("no descent")
    if fan is not None and not permutes_cones(L, fan):
        raise MorphismError("L does not map the fan to itself")
    return LatticeMap(lp, m.target, m.target)


def permutes_cones(L: LatticeMap, fan: Fan) -> bool:
    keys = {c.key for c in fan.maximal_cones}
    images = {frozenset(L(r) for r in c.rays) for c in fan.maximal_cones}
    return images == keys


def permutation_matrix(perm: Sequence[int], n: int) -> Matrix:
    """Matrix sending e_i to e_perm[i] (indices beyond ``perm`` fixed)."""
    full = list(perm) + list(range(len(perm), n))
    cols = [tuple(int(j == full[i]) for j in range(n)) for i in range(n)]
    return transpose(cols)

"""Star subdivisions, maximal crepant refinements and projectivity
certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .fan import Cone, DegenerateConeError, Fan, FanError, PLFunction
from .lattice_core import Vector, as_vector, dot, primitive, rref, solve, transpose, vadd
from .polytope import Polytope, boundary_lattice_points, lattice_points


class SubdivisionError(FanError):
    pass


class InfeasibleError(SubdivisionError):
    """No strictly convex function exists for the requested fan."""


# ---------------------------------------------------------------------------
# star subdivisions


def _pull(f: Fan, ell: Vector) -> Fan:
    cones = []
    for c in f.maximal_cones:
        if not c.contains(ell):
            cones.append(c)
            continue
        for n in c.facet_normals:
            if dot(n, ell) > 0:
                facet = [r for r in c.rays if dot(n, r) == 0]
                cones.append(Cone(facet + [ell], f.ambient_dim, irredundant=True))
    return Fan(cones, f.ambient_dim, name=f.name)


def star_subdivide(f: Fan, ell: Sequence) -> Fan:
    """Replace every cone containing ``ell`` by the joins of ``ell`` with
    its faces not containing ``ell``."""
    ell = as_vector(ell)
    if len(ell) != f.ambient_dim:
        raise SubdivisionError(f"{ell} has the wrong dimension")
    if primitive(ell) != ell:
        raise SubdivisionError(f"{ell} is not primitive")
    if ell in f.rays:
        raise SubdivisionError(f"{ell} is already a ray")
    if not f.contains(ell):
        raise SubdivisionError(f"{ell} is outside the support")
    return _pull(f, ell)


def refines(fine: Fan, coarse: Fan) -> bool:
    """Every maximal cone of ``fine`` lies in a cone of ``coarse``."""
    return all(any(c.contains_cone(s) for c in coarse.maximal_cones)
               for s in fine.maximal_cones)


def pulling_order(points: Iterable[Sequence]) -> list[Vector]:
    """Increasing squared length, ties broken lexicographically."""
    return sorted({as_vector(p) for p in points}, key=lambda p: (dot(p, p), p))


def is_crepant(f: Fan, p: Polytope) -> bool:
    """Every ray passes through a lattice point of the boundary of ``p``."""
    return all(_boundary_multiple(r, p) is not None for r in f.rays)


def _boundary_multiple(r: Vector, p: Polytope) -> int | None:
    t = min((Fraction(c) / -dot(n, r) for n, c in p.facets if dot(n, r) < 0), default=None)
    if t is None or t.denominator != 1 or t < 1:
        return None
    return int(t)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class SubdivisionCertificate:
    """A strictly convex PL function together with its linear pieces.

    ``margins`` maps ``(cone key, ray)`` to ``<m_s, r> + phi(r)`` for rays
    outside the cone.
    """

    phi: PLFunction
    pieces: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)

    def verify(self) -> bool:
        self.margins = self.phi.margins(self.pieces)
        return all(v > 0 for v in self.margins.values())

    @property
    def min_margin(self) -> Fraction:
        return min(self.margins.values()) if self.margins else Fraction(0)

    def to_json(self) -> dict:
        return self.phi.to_json()


def _piece_in_span(rays: Sequence[Vector], values: Sequence[Fraction]) -> Vector:
    """The ``m`` in the span of ``rays`` with ``<m, r> = -value``."""
    basis = _independent(rays)
    gram = [[dot(a, b) for b in basis] for a in basis]
    rhs = [-values[rays.index(b)] for b in basis]
    y = solve(gram, rhs)
    m = tuple(sum((Fraction(yi) * b[k] for yi, b in zip(y, basis)), Fraction(0))
              for k in range(len(rays[0])))
    if any(dot(m, r) != -v for r, v in zip(rays, values)):
        raise DegenerateConeError("values are not linear on the cone")
    return m


def _independent(rays: Sequence[Vector]) -> list[Vector]:
    _, pivots = rref(transpose(rays))
    return [rays[i] for i in pivots]


def pieces_for(phi: PLFunction) -> dict:
    return {c.key: _piece_in_span(list(c.rays), [phi.ray_values[r] for r in c.rays])
            for c in phi.fan.maximal_cones}


def _local_ok(fan: Fan, values: Mapping, pieces: Mapping, new_keys: set, ell: Vector) -> bool:
    for c in fan.maximal_cones:
        m = pieces[c.key]
        if c.key in new_keys:
            targets = fan.rays
        else:
            targets = (ell,)
        for r in targets:
            if r not in c.key and dot(m, r) + values[r] <= 0:
                return False
    return True


def pull_with_certificate(f: Fan, points: Sequence[Vector], phi: PLFunction,
                          pieces: Mapping | None = None) -> tuple[Fan, SubdivisionCertificate]:
    """Pull ``points`` in the given order, lowering a strictly convex
    function at each pulled point so it stays strictly convex.

    ``phi`` must be strictly convex on ``f`` (with ``pieces`` for maximal
    cones that are not full-dimensional).
    """
    values = dict(phi.ray_values)
    pieces = dict(pieces) if pieces is not None else pieces_for(phi)
    cur = PLFunction(f, values)
    if not cur.is_strictly_convex(pieces):
        raise SubdivisionError("starting function is not strictly convex")
    fan = f
    margins_floor = min(cur.margins(pieces).values(), default=Fraction(1))
    for ell in points:
        ell = primitive(ell)
        touched = [c for c in fan.maximal_cones if c.contains(ell)]
        if not touched:
            raise SubdivisionError(f"{ell} is outside the support")
        if ell in fan.rays and all(c.is_simplicial() for c in touched):
            continue
        new = _pull(fan, ell)
        # cones through ell keep their key when already simplicial but change values
        new_keys = {c.key for c in new.maximal_cones if ell in c.key}
        base = values[ell] if ell in values else _interpolate(touched[0], pieces, ell)
        delta = margins_floor / 2
        while True:
            trial = dict(values)
            trial[ell] = base - delta
            trial_pieces = {k: v for k, v in pieces.items() if k in
                            {c.key for c in new.maximal_cones}}
            for c in new.maximal_cones:
                if c.key in new_keys:
                    trial_pieces[c.key] = _piece_in_span(list(c.rays),
                                                         [trial[r] for r in c.rays])
            if _local_ok(new, trial, trial_pieces, new_keys, ell):
                break
            delta /= 2
            if delta < Fraction(1, 2**200):
                raise SubdivisionError(f"could not keep convexity when pulling {ell}")
        fan, values, pieces = new, trial, trial_pieces
        margins_floor = min(margins_floor, delta)
    values = {r: values[r] for r in fan.rays}
    cert = SubdivisionCertificate(PLFunction(fan, values), pieces)
    if not cert.verify():
        raise SubdivisionError("certificate failed global verification")
    return fan, cert


def _interpolate(c: Cone, pieces: Mapping, x: Vector) -> Fraction:
    return -dot(pieces[c.key], x)


def maximal_crepant_refinement(f: Fan, p: Polytope, phi: PLFunction | None = None,
                               pieces: Mapping | None = None
                               ) -> tuple[Fan, SubdivisionCertificate]:
    """Simplicial refinement of ``f`` using every nonzero boundary lattice
    point of ``p`` in the support as a ray.

    New points are pulled in :func:`pulling_order`, then the existing rays.  ``phi`` is a strictly
    convex function on ``f`` to start from; by default one is solved for
    with :func:`certify_regular`.
    """
    for r in f.rays:
        if _boundary_multiple(r, p) is None:
            raise SubdivisionError(f"ray {r} does not pass through a boundary lattice point")
    points = [x for x in boundary_lattice_points(p) if f.contains(x)]
    rays = set(f.rays)
    fresh = [x for x in points if primitive(x) not in rays]
    # existing rays last: they only split cones left non-simplicial
    order = pulling_order(fresh) + pulling_order(x for x in points if primitive(x) in rays)
    if phi is None:
        phi = certify_regular(f, f, p).phi
    return pull_with_certificate(f, order, phi, pieces)


# ---------------------------------------------------------------------------
# exact linear feasibility


def _normalize(row: tuple, b: Fraction) -> tuple[tuple, Fraction]:
    scale = max((abs(a) for a in row), default=0)
    if scale == 0:
        return row, b
    return tuple(a / scale for a in row), b / scale


def fourier_motzkin(ineqs: Sequence[tuple[Sequence, object]], nvars: int) -> list[Fraction] | None:
    """A rational point with ``<a, x> >= b`` for all ``(a, b)``, or ``None``."""
    system = [tuple(Fraction(a) for a in row) for row, _ in ineqs]
    rhs = [Fraction(b) for _, b in ineqs]
    stages = []
    current = list(zip(system, rhs))
    if any(not any(a) and b > 0 for a, b in current):
        return None
    for k in reversed(range(nvars)):
        stages.append(current)
        pos = [(a, b) for a, b in current if a[k] > 0]
        neg = [(a, b) for a, b in current if a[k] < 0]
        nxt = {}
        for a, b in [(a, b) for a, b in current if a[k] == 0]:
            key, val = _normalize(a, b)
            nxt[key] = max(nxt.get(key, val), val)
        for ap, bp in pos:
            for an, bn in neg:
                cp, cn = -an[k], ap[k]
                row = tuple(cp * x + cn * y for x, y in zip(ap, an))
                key, val = _normalize(row, cp * bp + cn * bn)
                nxt[key] = max(nxt.get(key, val), val)
        current = list(nxt.items())
        if any(not any(a) and b > 0 for a, b in current):
            return None
    x = [Fraction(0)] * nvars
    for k, stage in zip(range(nvars), reversed(stages)):
        lo, hi = None, None
        for a, b in stage:
            if a[k] == 0:
                continue
            rest = sum((a[i] * x[i] for i in range(nvars) if i != k), Fraction(0))
            bound = (b - rest) / a[k]
            if a[k] > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
        if lo is None and hi is None:
            val = Fraction(0)
        elif lo is None:
            val = Fraction(math.floor(hi))
        elif hi is None:
            val = Fraction(math.ceil(lo))
        else:
            val = Fraction(math.ceil(lo)) if math.ceil(lo) <= hi else lo
        x[k] = val
    return x


def simplex_feasible(ineqs: Sequence[tuple[Sequence, object]], nvars: int) -> list[Fraction] | None:
    """Phase-one simplex with Bland's rule on ``<a, x> >= b`` (free ``x``)."""
    rows = [([Fraction(a) for a in row], Fraction(b)) for row, b in ineqs]
    m = len(rows)
    # columns: x+ (n), x- (n), surplus (m), artificial (m)
    n = nvars
    width = 2 * n + 2 * m
    tab = []
    for i, (a, b) in enumerate(rows):
        line = a + [-v for v in a] + [Fraction(-int(j == i)) for j in range(m)]
        if b < 0:
            line = [-v for v in line]
            b = -b
        line += [Fraction(int(j == i)) for j in range(m)]
        tab.append(line + [b])
    basis = [2 * n + m + i for i in range(m)]
    cost = [Fraction(0)] * (2 * n + m) + [Fraction(1)] * m + [Fraction(0)]
    # reduced costs of the artificial objective
    obj = cost[:]
    for i in range(m):
        obj = [o - t for o, t in zip(obj, tab[i])]
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        ratios = [(tab[i][-1] / tab[i][enter], basis[i], i)
                  for i in range(m) if tab[i][enter] > 0]
        if not ratios:
            break
        _, _, leave = min(ratios)
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [v - f * w for v, w in zip(tab[i], tab[leave])]
        f = obj[enter]
        obj = [v - f * w for v, w in zip(obj, tab[leave])]
        basis[leave] = enter
    if -obj[-1] != 0:
        return None
    values = [Fraction(0)] * width
    for i, j in enumerate(basis):
        values[j] = tab[i][-1]
    return [values[i] - values[n + i] for i in range(n)]


def solve_feasibility(ineqs, eqs, nvars: int, method: str = "auto") -> list[Fraction] | None:
    """Solve ``<a, x> >= b`` and ``<a, x> = b`` exactly.

    Equations are eliminated first; ``method`` is ``"fm"``, ``"simplex"``
    or ``"auto"`` (elimination for at most 40 free variables).
    """
    eqs = [(tuple(Fraction(a) for a in row), Fraction(b)) for row, b in eqs]
    ineqs = [(tuple(Fraction(a) for a in row), Fraction(b)) for row, b in ineqs]
    # x = x0 + N y parametrizes the equation solutions
    if eqs:
        aug = [list(row) + [b] for row, b in eqs]
        red, pivots = rref(aug)
        if nvars in pivots:
            return None
        free = [j for j in range(nvars) if j not in pivots]
        x0 = [Fraction(0)] * nvars
        for r, j in enumerate(pivots):
            x0[j] = red[r][nvars]
        basis = []
        for fj in free:
            v = [Fraction(0)] * nvars
            v[fj] = Fraction(1)
            for r, j in enumerate(pivots):
                v[j] = -red[r][fj]
            basis.append(v)
    else:
        x0 = [Fraction(0)] * nvars
        basis = [[Fraction(int(i == j)) for j in range(nvars)] for i in range(nvars)]
    reduced = [(tuple(dot(row, v) for v in basis), b - dot(row, x0)) for row, b in ineqs]
    k = len(basis)
    if method == "fm" or (method == "auto" and k <= 40):
        y = fourier_motzkin(reduced, k)
    else:
        y = simplex_feasible(reduced, k)
    if y is None:
        return None
    return [x0[i] + sum((y[j] * basis[j][i] for j in range(k)), Fraction(0))
            for i in range(nvars)]


def _walls(f: Fan) -> list[tuple[Cone, Cone, frozenset]]:
    by_facet = {}
    for c in f.maximal_cones:
        for n in c.facet_normals:
            s = frozenset(r for r in c.rays if dot(n, r) == 0)
            by_facet.setdefault(s, []).append(c)
    return [(a, b, s) for s, cs in sorted(by_facet.items(), key=lambda kv: sorted(kv[0]))
            if len(cs) == 2 for a, b in (cs, cs[::-1])]


def certify_regular(f_refined: Fan, f_base: Fan, p: Polytope,
                    method: str = "auto") -> SubdivisionCertificate:
    """Find a strictly convex function on ``f_refined`` by exact linear
    feasibility over the ray values.

    Wall constraints ask for margin at least 1 across every pair of
    maximal cones sharing a facet; the solution is then checked against
    all rays.  Raises :class:`InfeasibleError` if no function exists.
    """
    d = f_refined.ambient_dim
    if any(c.dim != d for c in f_refined.maximal_cones):
        raise DegenerateConeError("certify_regular needs full-dimensional maximal cones")
    if not refines(f_refined, f_base):
        raise SubdivisionError("the first fan does not refine the second")
    if not is_crepant(f_refined, p):
        raise SubdivisionError("some ray misses the boundary lattice points")
    rays = list(f_refined.rays)
    index = {r: i for i, r in enumerate(rays)}
    n = len(rays)

    def relation(c: Cone, r: Vector) -> tuple:
        # phi(r) - (linear extension of phi from c)(r) as a row over ray values
        basis = _independent(list(c.rays))
        coef = solve(transpose(basis), r)
        row = [Fraction(0)] * n
        row[index[r]] += 1
        for a, b in zip(coef, basis):
            row[index[b]] -= a
        return tuple(row)

    eqs, ineqs = [], []
    for c in f_refined.maximal_cones:
        basis = set(_independent(list(c.rays)))
        eqs += [(relation(c, r), 0) for r in c.rays if r not in basis]
    for a, b, wall in _walls(f_refined):
        ineqs += [(relation(a, r), 1) for r in b.rays if r not in wall]
    x = solve_feasibility(ineqs, eqs, n, method)
    if x is None:
        raise InfeasibleError("no strictly convex function on this fan")
    phi = PLFunction(f_refined, dict(zip(rays, x)))
    cert = SubdivisionCertificate(phi, pieces_for(phi))
    if not cert.verify():
        raise InfeasibleError("wall conditions hold but the function is not globally convex")
    return cert


# ---------------------------------------------------------------------------
# census


def find_unsubdivided(f: Fan, p: Polytope, dim: int | None = None) -> list[Cone]:
    """Cones of ``f`` that are not simplicial or contain a nonzero lattice
    point of ``p`` whose ray is not a ray of ``f``.

    ``dim`` restricts the search to cones of one dimension.
    """
    rays = set(f.rays)
    extra = [x for x in lattice_points(p) if any(x) and primitive(x) not in rays]
    out = []
    for c in f.cones(dim):
        if c.dim == 0:
            continue
        if not c.is_simplicial() or any(c.contains(x) for x in extra):
            out.append(c)
    return out


def minimal_cones(cones: Sequence[Cone]) -> list[Cone]:
    """Cones in the list with no proper face in the list."""
    keys = [c.key for c in cones]
    return [c for c in cones if not any(k < c.key and c.has_face(k) for k in keys)]


def evaluate(cert: SubdivisionCertificate, x: Sequence) -> Fraction:
    """Value of the certified function at ``x`` using its linear pieces."""
    for c in cert.phi.fan.maximal_cones:
        if c.contains(x):
            return -dot(cert.pieces[c.key], x)
    raise SubdivisionError(f"{x} is outside the support")


def face_dual_piece(p: Polytope, face) -> Vector:
    """Average of the dual vertices of the facets of ``p`` containing
    ``face``; it is ``-1`` exactly on ``face`` among points of ``p``."""
    duals = [tuple(Fraction(x, c) for x in n) for n, c in p.facets
             if all(dot(n, v) + c == 0 for v in face.vertices)]
    return tuple(sum(d[i] for d in duals) / len(duals) for i in range(p.ambient_dim))


def intersection_certificate(m, target: SubdivisionCertificate, source: Fan,
                             fan: Fan) -> SubdivisionCertificate:
    """Strictly convex function on the intersection fan ``fan``: the
    support function of the polytope under ``source`` plus the target
    certificate composed with ``m``."""
    p = source.polytope
    if p is None or not source.cone_faces:
        raise SubdivisionError("the source must be a fan over faces of a polytope")
    gauge = PLFunction.support_function(fan, p).ray_values
    pieces = {}
    for c in fan.maximal_cones:
        c2 = next(s for s in source.maximal_cones if s.contains_cone(c))
        images = [m(r) for r in c.rays]
        c1 = next(t for t in target.phi.fan.maximal_cones
                  if all(t.contains(y) for y in images))
        pieces[c.key] = vadd(face_dual_piece(p, source.cone_faces[c2.key]),
                             m.pull_normal(target.pieces[c1.key]))
    values = {r: gauge[r] + evaluate(target, m(r)) for r in fan.rays}
    cert = SubdivisionCertificate(PLFunction(fan, values), pieces)
    if not cert.verify():
        raise SubdivisionError("composed function is not strictly convex")
    return cert

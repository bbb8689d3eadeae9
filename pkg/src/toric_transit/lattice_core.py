"""Exact integer and rational linear algebra.

Vectors are plain tuples of ``int`` or ``fractions.Fraction``; matrices are
tuples of row tuples.  Nothing in here ever touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

Vector = tuple
Matrix = tuple


def as_vector(v: Iterable) -> Vector:
    """Coerce to a tuple, keeping integral values as ``int``."""
    out = []
    for x in v:
        if isinstance(x, Fraction) and x.denominator == 1:
            x = x.numerator
        elif isinstance(x, float):
            raise TypeError("floating point coordinates are not allowed")
        out.append(x)
    return tuple(out)


def as_matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(as_vector(r) for r in rows)


def is_integral(v: Iterable) -> bool:
    return all(isinstance(x, int) or x.denominator == 1 for x in v)


def dot(u: Sequence, v: Sequence) -> int | Fraction:
    return sum(a * b for a, b in zip(u, v))


def vadd(u: Sequence, v: Sequence) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Sequence, v: Sequence) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v: Sequence) -> Vector:
    return tuple(c * a for a in v)


def matvec(m: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in m)


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, c) for c in cols) for row in a)


def transpose(m: Sequence[Sequence]) -> Matrix:
    return tuple(zip(*m))


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def content(v: Sequence[int]) -> int:
    return reduce(gcd, (abs(int(x)) for x in v), 0)


def primitive(v: Sequence) -> Vector:
    """Divide an integral vector by the gcd of its entries.

    >>> primitive((0, 0, 0, 4, -2))
    (0, 0, 0, 2, -1)
    """
    if not is_integral(v):
        raise ValueError(f"vector {v!r} is not integral")
    v = tuple(int(x) for x in v)
    g = content(v)
    if g == 0:
        raise ValueError("the zero vector has no primitive representative")
    return tuple(x // g for x in v)


def clear_denominators(v: Sequence) -> Vector:
    """Smallest positive integer multiple of a rational vector, made primitive."""
    den = 1
    for x in v:
        if isinstance(x, Fraction):
            den = den * x.denominator // gcd(den, x.denominator)
    w = tuple(int(x * den) for x in v)
    g = content(w)
    return w if g == 0 else tuple(x // g for x in w)


def sign_normalize(v: Sequence) -> Vector:
    """Flip ``v`` so that its first nonzero coordinate is positive."""
    for x in v:
        if x != 0:
            return tuple(v) if x > 0 else tuple(-a for a in v)
    return tuple(v)


# ---------------------------------------------------------------------------
# Rational elimination


def rref(m: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals and its pivot columns."""
    a = [[Fraction(x) for x in row] for row in m]
    if not a:
        return a, []
    ncols = len(a[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m:
        return 0
    return len(rref(m)[1])


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[Vector]:
    """Basis of the rational null space, each vector scaled to a primitive
    integer vector."""
    if not m:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    ncols = len(m[0])
    a, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(a, pivots):
            v[pc] = -row[f]
        basis.append(clear_denominators(v))
    return basis


def solve(m: Sequence[Sequence], b: Sequence) -> Vector | None:
    """One rational solution of ``m x = b`` or ``None`` if inconsistent."""
    ncols = len(m[0])
    aug = [list(row) + [rhs] for row, rhs in zip(m, b)]
    a, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(a, pivots):
        x[pc] = row[-1]
    return as_vector(x)


def det(m: Sequence[Sequence]) -> int | Fraction:
    """Determinant over the rationals (integers stay integers)."""
    if all(isinstance(x, int) for row in m for x in row):
        return int_det(m)
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    out = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            return 0
        if p != k:
            a[k], a[p] = a[p], a[k]
            out = -out
        out *= a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return out.numerator if out.denominator == 1 else out


def _bareiss_int(m):
    n = len(m)
    a = [list(row) for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix, staying in ``int`` throughout."""
    if len(m) == 0:
        return 1
    return _bareiss_int([[int(x) for x in row] for row in m])


# ---------------------------------------------------------------------------
# Integer lattices


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_form(m: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix]:
    """Row-style Hermite normal form.

    Returns ``(h, u)`` with ``u`` unimodular and ``u @ m == h``.  Pivots of
    ``h`` are positive, entries above a pivot are reduced into
    ``[0, pivot)`` and zero rows sit at the bottom.
    """
    if not m or not m[0]:
        raise ValueError("hermite_form needs a nonempty matrix")
    h = [[int(x) for x in row] for row in m]
    nrows, ncols = len(h), len(h[0])
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]

    def combine(i, j, a, b, c, d):
        # rows (i, j) <- (a*ri + b*rj, c*ri + d*rj); ad - bc = +-1
        for mat in (h, u):
            ri, rj = mat[i], mat[j]
            mat[i] = [a * x + b * y for x, y in zip(ri, rj)]
            mat[j] = [c * x + d * y for x, y in zip(ri, rj)]

    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        for i in range(r + 1, nrows):
            if h[i][c] == 0:
                continue
            a, b = h[r][c], h[i][c]
            g, x, y = _xgcd(a, b)
            combine(r, i, x, y, -b // g, a // g)
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        p = h[r][c]
        for i in range(r):
            q = h[i][c] // p
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                u[i] = [x - q * y for x, y in zip(u[i], u[r])]
        r += 1
    return as_matrix(h), as_matrix(u)


def integer_kernel(m: Sequence[Sequence[int]]) -> list[Vector]:
    """Basis of the lattice ``{k in Z^n : m k = 0}``.

    The basis is put in Hermite form, so it is canonical; each vector is
    primitive with its first nonzero coordinate positive.
    """
    if not m:
        raise ValueError("empty matrix")
    ncols = len(m[0])
    h, u = hermite_form(transpose(m))
    basis = [u[i] for i in range(len(h)) if not any(h[i])]
    if not basis:
        return []
    hb, _ = hermite_form(basis)
    out = [row for row in hb if any(row)]
    return [sign_normalize(primitive(v)) for v in out][: ncols]


def integer_solve(m: Sequence[Sequence[int]], b: Sequence[int]) -> Vector | None:
    """One integer solution of ``m x = b`` or ``None``."""
    ncols = len(m[0])
    # Column HNF: m @ v = [H 0] with v unimodular, via the transpose.
    h, u = hermite_form(transpose(m))
    # m @ u^T = h^T: forward-substitute over the pivot structure of h
    y = [0] * ncols
    residual = list(b)
    for i, row in enumerate(h):
        piv = next((c for c, x in enumerate(row) if x != 0), None)
        if piv is None:
            break
        if residual[piv] % row[piv]:
            return None
        y[i] = residual[piv] // row[piv]
        residual = [rv - y[i] * x for rv, x in zip(residual, row)]
    if any(residual):
        return None
    x = matvec(transpose(u), y)
    assert matvec(m, x) == tuple(b)
    return x


def is_unimodular(m: Sequence[Sequence[int]]) -> bool:
    return len(m) == len(m[0]) and abs(int_det(m)) == 1


def span_basis(vectors: Sequence[Sequence]) -> list[Vector]:
    """A basis (rows of the RREF, cleared to integers) of the linear span."""
    if not vectors:
        return []
    a, pivots = rref(vectors)
    return [clear_denominators(a[i]) for i in range(len(pivots))]


def coordinates(basis: Sequence[Sequence], v: Sequence) -> Vector:
    """Coordinates of ``v`` in a basis of a subspace containing it."""
    x = solve(transpose(basis), v)
    if x is None:
        raise ValueError(f"{v!r} is not in the span of the basis")
    return x


# ---------------------------------------------------------------------------
# Double description


def _zero_set(v, rows):
    return frozenset(i for i, a in enumerate(rows) if dot(a, v) == 0)


def double_description(ineqs: Sequence[Sequence], eqs: Sequence[Sequence] = (),
                       dim: int | None = None) -> tuple[list[Vector], list[Vector]]:
    """Generators of the cone ``{x : a.x >= 0 for a in ineqs, e.x = 0}``.

    Returns ``(lines, rays)``: a basis of the lineality space and the
    extreme rays modulo it, all as primitive integer vectors.  Coefficients
    may be rational; they are cleared first.
    """
    if dim is None:
        some = list(ineqs) or list(eqs)
        if not some:
            raise ValueError("dimension required when there are no constraints")
        dim = len(some[0])
    rows = [clear_denominators(a) for a in ineqs]
    rows = [a for a in rows if any(a)]
    for e in eqs:
        e = clear_denominators(e)
        if any(e):
            rows.append(e)
            rows.append(tuple(-x for x in e))
    lines = [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    rays: list[Vector] = []
    seen: list = []
    for a in rows:
        seen.append(a)
        vals = [dot(a, l) for l in lines]
        k = next((i for i, x in enumerate(vals) if x != 0), None)
        if k is not None:
            piv = lines.pop(k)
            pa = vals.pop(k)
            if pa < 0:
                piv, pa = tuple(-x for x in piv), -pa
            new_lines = []
            for l, la in zip(lines, vals):
                if la:
                    l = clear_denominators(vsub(vscale(pa, l), vscale(la, piv)))
                new_lines.append(l)
            lines = new_lines
            new_rays = []
            for r in rays:
                ra = dot(a, r)
                if ra:
                    r = clear_denominators(vsub(vscale(pa, r), vscale(ra, piv)))
                new_rays.append(r)
            rays = new_rays + [primitive(piv)]
            continue
        pos, zero, neg = [], [], []
        for r in rays:
            s = dot(a, r)
            (pos if s > 0 else neg if s < 0 else zero).append((r, s))
        if not neg:
            continue
        prev_rows = seen[:-1]
        zs = {r: _zero_set(r, prev_rows) for r, _ in pos + neg + zero}
        new = [r for r, _ in pos] + [r for r, _ in zero]
        allr = [r for r, _ in pos + neg + zero]
        for p, sp in pos:
            for n, sn in neg:
                common = zs[p] & zs[n]
                # combinatorial adjacency test
                if len(common) < dim - len(lines) - 2:
                    continue
                if any(r != p and r != n and common <= zs[r] for r in allr):
                    continue
                new.append(clear_denominators(vsub(vscale(sp, n), vscale(sn, p))))
        rays = new
    lines = [sign_normalize(l) for l in span_basis(lines)] if lines else []
    return lines, sorted(set(rays))


def cone_facets(rays: Sequence[Sequence], dim: int | None = None
                ) -> tuple[list[Vector], list[Vector]]:
    """H-representation of the cone generated by ``rays``.

    Returns ``(equations, normals)``: a basis of the orthogonal complement of
    the span, and the inward facet normals (taken modulo the equations, so
    only meaningful on the span).
    """
    if dim is None:
        dim = len(rays[0])
    if not rays:
        return [tuple(int(i == j) for j in range(dim)) for i in range(dim)], []
    eqs, normals = double_description(rays, dim=dim)
    if eqs:
        normals = sorted({project_onto_span(n, rays) for n in normals})
    return eqs, normals


def project_onto_span(v: Sequence, vectors: Sequence[Sequence]) -> Vector:
    """Orthogonal projection of ``v`` onto span(vectors), as a primitive
    integer vector."""
    basis = span_basis(vectors)
    gram = [[dot(a, b) for b in basis] for a in basis]
    coef = solve(gram, [dot(a, v) for a in basis])
    proj = [Fraction(0)] * len(v)
    for c, b in zip(coef, basis):
        proj = [p + c * x for p, x in zip(proj, b)]
    return clear_denominators(proj)

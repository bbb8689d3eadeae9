from fractions import Fraction
from itertools import combinations

import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st

from toric_transit.lattice_core import (
    as_vector, clear_denominators, cone_facets, det, double_description, hermite_form, int_det,
    integer_kernel, integer_solve, is_unimodular, matmul, matvec, nullspace, primitive, rank, rref,
    solve, transpose)

small = st.integers(-6, 6)


def matrices(rows=st.integers(1, 4), cols=st.integers(1, 5)):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(small, min_size=rc[1], max_size=rc[1]),
                            min_size=rc[0], max_size=rc[0]))


def test_as_vector_normalizes_integral_fractions():
    assert as_vector([Fraction(4, 2), 3]) == (2, 3)
    assert type(as_vector([Fraction(4, 2)])[0]) is int


def test_as_vector_rejects_floats():
    with pytest.raises(TypeError):
        as_vector([0.5])


def test_primitive():
    assert primitive((4, -6, 0)) == (2, -3, 0)
    with pytest.raises(ValueError):
        primitive((Fraction(1, 2), Fraction(1, 3)))
    assert clear_denominators((Fraction(1, 2), Fraction(1, 3))) == (3, 2)


@given(matrices())
def test_rank_matches_sympy(m):
    assert rank(m) == sympy.Matrix(m).rank()


@given(st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinants_match_sympy(m):
    expected = sympy.Matrix(m).det()
    assert det(m) == expected
    assert int_det(m) == expected


@given(matrices())
def test_nullspace_is_annihilated_and_complete(m):
    ns = nullspace(m)
    assert len(ns) == len(m[0]) - sympy.Matrix(m).rank()
    for v in ns:
        assert all(x == 0 for x in matvec(m, v))


@given(matrices())
def test_rref_matches_sympy(m):
    red, pivots = rref(m)
    sm, spiv = sympy.Matrix(m).rref()
    assert tuple(pivots) == tuple(spiv)
    assert [[Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in row]
            for row in sm.tolist()][: len(red)] == [list(r) for r in red]


@given(matrices())
def test_hermite_form_properties(m):
    h, u = hermite_form(m)
    assert matmul(u, m) == h
    assert abs(int_det(u)) == 1
    # pivots positive, strictly moving right, entries above reduced
    last = -1
    for i, row in enumerate(h):
        piv = next((c for c, x in enumerate(row) if x), None)
        if piv is None:
            assert all(not any(r) for r in h[i:])
            break
        assert piv > last and row[piv] > 0
        assert all(0 <= h[k][piv] < row[piv] for k in range(i))
        last = piv


@given(matrices())
def test_integer_kernel_is_saturated_basis(m):
    k = integer_kernel(m)
    assert len(k) == len(m[0]) - rank(m)
    for v in k:
        assert all(x == 0 for x in matvec(m, v))
    if k:
        # saturation: the gcd of the maximal minors is 1
        minors = sympy.Matrix(k).T
        n, r = minors.shape
        g = 0
        for rows in combinations(range(n), r):
            g = sympy.gcd(g, minors.extract(list(rows), list(range(r))).det())
        assert g == 1


@given(matrices(), st.data())
def test_integer_solve_finds_solutions_of_solvable_systems(m, data):
    x0 = data.draw(st.lists(small, min_size=len(m[0]), max_size=len(m[0])))
    b = matvec(m, x0)
    x = integer_solve(m, b)
    assert x is not None and matvec(m, x) == b


def test_integer_solve_detects_non_integral_systems():
    assert integer_solve([[2, 0], [0, 1]], [1, 0]) is None
    assert integer_solve([[2, 4]], [6]) is not None
    assert integer_solve([[1, 1], [1, 1]], [0, 1]) is None


def test_solve_exact_rational():
    assert solve([[2, 1], [1, 3]], [1, 2]) == (Fraction(1, 5), Fraction(3, 5))
    assert solve([[1, 1], [1, 1]], [1, 2]) is None


def test_is_unimodular():
    assert is_unimodular([[1, 1], [0, 1]])
    assert not is_unimodular([[2, 0], [0, 1]])


def test_double_description_of_orthant_with_cut():
    lines, rays = double_description([(1, 0), (0, 1)], dim=2)
    assert lines == [] and sorted(rays) == [(0, 1), (1, 0)]
    lines, rays = double_description([(1, -1)], dim=2)
    assert len(lines) == 1 and len(rays) == 1


@given(st.lists(st.tuples(small, small, small), min_size=1, max_size=6))
def test_cone_facets_contain_generators(gens):
    gens = [g for g in gens if any(g)]
    assume(gens)
    eqs, normals = cone_facets(gens, 3)
    for g in gens:
        assert all(sum(a * b for a, b in zip(e, g)) == 0 for e in eqs)
        assert all(sum(a * b for a, b in zip(n, g)) >= 0 for n in normals)


def test_transpose_roundtrip():
    m = ((1, 2, 3), (4, 5, 6))
    assert transpose(transpose(m)) == m

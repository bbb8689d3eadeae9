from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from toric_transit import paper_data
from toric_transit.fan import Cone, face_fan
from toric_transit.lattice_core import as_vector, dot, primitive
from toric_transit.polytope import hull, lattice_points
from toric_transit.subdivision import (
    SubdivisionError, certify_regular, find_unsubdivided, fourier_motzkin,
    is_crepant, maximal_crepant_refinement, minimal_cones, pulling_order, refines,
    simplex_feasible, solve_feasibility, star_subdivide)

SQUARE_POLY = hull([(1, 1), (1, -1), (-1, 1), (-1, -1)])
SQUARE_FAN = face_fan(SQUARE_POLY)
# ray values of a strictly convex function on the table fan (frozen, cross-checked below)
TABLE_VALUES = {
    (-1, -1, -1, -1): 0, (-1, 0, 0, 1): 0, (-1, 0, 1, 0): 0, (-1, 1, 0, 0): 0,
    (-1, -1, -1, 3): 1, (-1, -1, 3, -1): 1, (-1, 3, -1, -1): 1,
    (3, -1, -1, -1): 5, (7, -1, -1, -1): 11,
}

systems = st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.lists(st.integers(-3, 3), min_size=n, max_size=n),
                       st.integers(-4, 4)), min_size=1, max_size=6)))


def _linprog_feasible(ineqs, n):
    a = -np.array([row for row, _ in ineqs], dtype=float)
    b = -np.array([rhs for _, rhs in ineqs], dtype=float)
    res = linprog(np.zeros(n), A_ub=a, b_ub=b, bounds=[(None, None)] * n, method="highs")
    return res.status == 0


def _satisfies(x, ineqs):
    return all(dot(row, x) >= rhs for row, rhs in ineqs)


@given(systems)
def test_feasibility_solvers_agree_with_linprog(system):
    n, ineqs = system
    fm, sx = fourier_motzkin(ineqs, n), simplex_feasible(ineqs, n)
    assert (fm is not None) == (sx is not None) == _linprog_feasible(ineqs, n)
    if fm is not None:
        assert _satisfies(fm, ineqs) and _satisfies(sx, ineqs)


@given(systems, st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_solve_feasibility_with_equations(system, eq_row):
    n, ineqs = system
    eqs = [(eq_row[:n], 1)]
    for method in ("fm", "simplex"):
        x = solve_feasibility(ineqs, eqs, n, method)
        if x is not None:
            assert _satisfies(x, ineqs) and dot(eq_row[:n], x) == 1


def test_star_subdivision_of_square_fan():
    fine = star_subdivide(SQUARE_FAN, (1, 0))
    assert len(fine.maximal_cones) == 5 and refines(fine, SQUARE_FAN)
    assert not refines(SQUARE_FAN, fine)


@pytest.mark.parametrize("ell,match", [((2, 0), "primitive"), ((1, 1), "already"),
                                       ((1, 0, 0), "dimension")])
def test_star_subdivision_errors(ell, match):
    with pytest.raises(SubdivisionError, match=match):
        star_subdivide(SQUARE_FAN, ell)


def test_star_subdivision_outside_support():
    half = face_fan(SQUARE_POLY)
    partial = type(half)([c for c in half.maximal_cones if c.contains((1, 0))], 2)
    with pytest.raises(SubdivisionError, match="outside"):
        star_subdivide(partial, (-1, 0))


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), max_size=8))
def test_pulling_order_is_sorted_by_length_then_lex(pts):
    order = pulling_order(pts)
    keys = [(dot(p, p), p) for p in order]
    assert keys == sorted(keys) and len(order) == len(set(pts))


def test_crepant_refinement_of_square_fan():
    fan, cert = maximal_crepant_refinement(SQUARE_FAN, SQUARE_POLY)
    assert set(fan.rays) == {primitive(x) for x in lattice_points(SQUARE_POLY) if any(x)}
    assert fan.is_simplicial() and is_crepant(fan, SQUARE_POLY) and cert.verify()
    assert not find_unsubdivided(fan, SQUARE_POLY)
    assert len(find_unsubdivided(SQUARE_FAN, SQUARE_POLY)) == 4


def test_certify_regular_on_table_fan_reproduces_frozen_values():
    table = paper_data.load("sigma_prime_wp")
    cert = certify_regular(table, table, paper_data.polytope("delta_star_wp"))
    assert cert.phi.ray_values == {as_vector(k): Fraction(v) for k, v in TABLE_VALUES.items()}
    assert cert.verify() and cert.min_margin == 1


def test_frozen_table_function_is_strictly_convex_by_linprog():
    # independent oracle: each cone's piece via numpy, margins checked in floats
    table = paper_data.load("sigma_prime_wp")
    for c in table.maximal_cones:
        rays = np.array(c.rays, dtype=float)
        vals = -np.array([TABLE_VALUES[r] for r in c.rays], dtype=float)
        m, *_ = np.linalg.lstsq(rays, vals, rcond=None)
        assert np.allclose(rays @ m, vals)
        for r in table.rays:
            if r not in c.key:
                assert m @ np.array(r, dtype=float) + TABLE_VALUES[r] > 0.5


def test_certify_regular_preconditions():
    coarse = star_subdivide(SQUARE_FAN, (1, 0))
    with pytest.raises(SubdivisionError, match="refine"):
        certify_regular(SQUARE_FAN, coarse, SQUARE_POLY)
    cross = hull([(1, 0), (0, 1), (-1, 0), (0, -1)])
    with pytest.raises(SubdivisionError, match="boundary"):
        certify_regular(SQUARE_FAN, SQUARE_FAN, cross)


def test_minimal_cones():
    a = Cone([(1, 0, 0), (0, 1, 0)])
    b = Cone([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert minimal_cones([a, b]) == [a]


# ---------------------------------------------------------------------------
# the fans built from the fixtures (shared, built once per session)


def test_mpcp_properties(ctx):
    mpcp, cert = ctx.mpcp
    assert refines(mpcp, ctx.table_fan) and mpcp.is_simplicial()
    assert is_crepant(mpcp, ctx.delta_star_wp) and cert.verify()
    rays = {primitive(x) for x in lattice_points(ctx.delta_star_wp) if any(x)}
    assert set(mpcp.rays) == rays


def test_intersection_fan_properties(ctx):
    fan = ctx.sigma_int
    assert refines(fan, ctx.reduced_fan)
    assert ctx.sigma_int_certificate.verify()
    points = {primitive(x) for x in lattice_points(ctx.nabla) if any(x)}
    assert set(fan.rays) <= points


def test_six_triangles_are_cones_of_intersection_fan(ctx):
    keys = {c.key for c in ctx.sigma_int.cones(3)}
    for t in paper_data.load("six_triangles")["items"]:
        assert frozenset(primitive(as_vector(v)) for v in t) in keys


def test_census_cones_are_genuinely_unsubdivided(ctx):
    fan = ctx.sigma_int
    missing = [x for x in lattice_points(ctx.nabla) if any(x) and primitive(x) not in
               set(fan.rays)]
    found = find_unsubdivided(fan, ctx.nabla, dim=3)
    assert len(found) == 25
    for c in found:
        assert not c.is_simplicial() or any(c.contains(x) for x in missing)
    assert sum(not c.is_simplicial() for c in found) == 3


def test_resolution_properties(ctx):
    res, cert = ctx.resolution
    assert refines(res, ctx.sigma_int) and res.is_simplicial()
    assert is_crepant(res, ctx.nabla) and cert.verify()
    assert not find_unsubdivided(res, ctx.nabla)

import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog
from hypothesis import assume, given
from hypothesis import strategies as st

from toric_transit import paper_data
from toric_transit.fan import (Cone, Fan, FanError, NefPartition, PLFunction, amenable_check,
                               face_fan, nef_partition_check, newton_polytope,
                               orbit_section_analysis)
from toric_transit.polytope import hull, lattice_points

vec3 = st.tuples(*[st.integers(-5, 5)] * 3)


def pointed_cone(gens):
    gens = [g for g in gens if any(g)]
    assume(gens)
    try:
        return Cone(gens, 3)
    except FanError:
        assume(False)
CUBE = hull(itertools.product((-1, 1), repeat=3))
CROSS = hull([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)])


@given(st.lists(vec3, min_size=1, max_size=6), st.lists(st.integers(0, 4), min_size=6,
                                                        max_size=6))
def test_nonnegative_combinations_lie_in_cone(gens, coefs):
    c = pointed_cone(gens)
    gens = [g for g in gens if any(g)]
    x = tuple(sum(k * g[i] for k, g in zip(coefs, gens)) for i in range(3))
    assert c.contains(x)
    assert all(c.contains(g) for g in gens)


@given(st.lists(vec3, min_size=1, max_size=5), vec3)
def test_cone_containment_matches_lp_oracle(gens, x):
    cone = pointed_cone(gens)
    gens = [g for g in gens if any(g)]
    a = np.array(gens, dtype=float).T
    res = linprog(np.zeros(len(gens)), A_eq=a, b_eq=np.array(x, dtype=float),
                  bounds=[(0, None)] * len(gens), method="highs")
    assert cone.contains(x) == (res.status == 0)


def test_cones_containing_a_line_are_rejected():
    with pytest.raises(FanError, match="pointed"):
        Cone([(1, 0), (0, 1), (0, -1)])


def test_face_fan_of_cube_and_cross_polytope():
    cube_fan, cross_fan = face_fan(CUBE), face_fan(CROSS)
    assert len(cube_fan.maximal_cones) == 6 and len(cube_fan.rays) == 8
    assert not cube_fan.is_simplicial()
    assert len(cross_fan.maximal_cones) == 8 and cross_fan.is_simplicial()
    assert cross_fan.is_complete() and not cross_fan.validate()


@given(vec3)
def test_face_fan_support_is_everything(x):
    c = face_fan(CROSS).cone_containing(x)
    assert c is not None and c.contains(x)


def test_face_fan_needs_interior_origin():
    with pytest.raises(FanError):
        face_fan(hull([(0, 0), (1, 0), (0, 1)]))


def test_support_function_of_cross_polytope():
    phi = PLFunction.support_function(face_fan(CROSS), CROSS)
    assert phi((3, -2, 1)) == 6
    assert set(newton_polytope(phi).vertices) == set(CUBE.vertices)
    assert phi.is_strictly_convex()


def test_support_function_newton_polytope_is_dual():
    dstar = paper_data.polytope("delta_star_wp")
    phi = PLFunction.support_function(face_fan(dstar), dstar)
    assert set(newton_polytope(phi).vertices) == set(paper_data.polytope("delta_wp").vertices)


def test_support_function_on_table_fan_is_convex_not_strict():
    table = paper_data.load("sigma_prime_wp")
    phi = PLFunction.support_function(table, paper_data.polytope("delta_star_wp"))
    assert phi.is_convex() and not phi.is_strictly_convex()


def _lowered_table_function(eps):
    table = paper_data.load("sigma_prime_wp")
    rays = paper_data.read_json("fans/sigma_prime_wp.json")["rays"]
    # third and last three listed rays are the lowered points
    values = {tuple(r): 1 - eps if i in (2, 6, 7, 8) else 1 for i, r in enumerate(rays)}
    return PLFunction.from_point_values(table, values)


@pytest.mark.parametrize("eps,strict", [(Fraction(1, 8), True), (Fraction(1, 2), True),
                                        (Fraction(0), False)])
def test_lowered_function_on_table_fan(eps, strict):
    phi = _lowered_table_function(eps)
    assert phi.is_convex() and phi.is_strictly_convex() == strict


@given(st.tuples(*[st.integers(-3, 3)] * 3))
def test_linear_function_is_convex_not_strict(m):
    fan = face_fan(CROSS)
    phi = PLFunction(fan, {r: Fraction(-sum(a * b for a, b in zip(m, r))) for r in fan.rays})
    assert phi.is_convex() and not phi.is_strictly_convex()


def test_table_fan_shape():
    table = paper_data.load("sigma_prime_wp")
    assert len(table.rays) == 9 and len(table.maximal_cones) == 14
    assert sum(c.is_simplicial() for c in table.maximal_cones) == 8
    assert not table.validate()


def test_from_point_values_scales_non_primitive_points():
    phi = PLFunction.from_point_values(face_fan(CROSS), {(2, 0, 0): 1})
    assert phi.ray_values[(1, 0, 0)] == Fraction(1, 2)


def test_margins_numeric_oracle():
    phi = PLFunction.support_function(face_fan(CROSS), CROSS)
    for (key, r), m in phi.margins().items():
        rays = sorted(key)
        piece = np.linalg.solve(np.array(rays, dtype=float),
                                -np.array([float(phi.ray_values[v]) for v in rays]))
        assert float(m) == pytest.approx(piece @ np.array(r, dtype=float) + 1)


def _nabla_parts():
    nabla_fan = face_fan(paper_data.polytope("nabla"))
    return [PLFunction.from_point_values(nabla_fan,
                                         {v: 1 for v in paper_data.polytope(n).vertices})
            for n in ("nabla_1", "nabla_2")]


def test_nef_newton_polytopes_lattice_points():
    e = [tuple(int(i == j) for j in range(5)) for i in range(5)]
    first, second = (sorted(lattice_points(newton_polytope(p))) for p in _nabla_parts())
    assert first == sorted([(0,) * 5] + e[:4])
    assert second == sorted([(0,) * 5, e[4], (-1,) * 5])


def test_nabla_partition_is_nef():
    assert nef_partition_check(NefPartition(_nabla_parts()))


def test_orbit_sections_on_open_torus_keep_every_monomial():
    newt = newton_polytope(_nabla_parts()[1])
    nonvanishing, vanishing = orbit_section_analysis(None, newt, _nabla_parts()[1])
    assert len(nonvanishing) == 3 and not vanishing


def test_amenable_vectors():
    data = paper_data.load("nef_partition_p5")
    fan = face_fan(paper_data.polytope(data["polytope"]))
    np_ = NefPartition([PLFunction.from_point_values(fan, {tuple(r): v for r, v in
                                                           part["ray_values"]})
                        for part in data["parts"]])
    assert nef_partition_check(np_)
    for v in paper_data.load("amenable_vectors")["items"]:
        assert amenable_check(v, np_)
    assert not amenable_check((0, 0, 0, 0, 1), np_)


def test_fan_json_roundtrip():
    table = paper_data.load("sigma_prime_wp")
    back = Fan.from_json(table.to_json())
    assert back.rays == table.rays
    assert [c.key for c in back.maximal_cones] == [c.key for c in table.maximal_cones]

from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from toric_transit import paper_data
from toric_transit.checks import B_VALUE, restrict_sections
from toric_transit.laurent import (
    PARAMETER, LaurentError, LaurentPoly, MonomialMap, ParamPoly, chart_multiplier,
    chart_restrict, check_chart_variables, eval_gradient, eval_hessian, fractions_equal,
    parse, rewrite_exponent, section_points, substitute, substitute_fraction)

VARS = ("x", "y", "z")
SYM = sympy.symbols(VARS)
B = sympy.Symbol(PARAMETER)


def to_sympy(f: LaurentPoly):
    syms = sympy.symbols(f.variables)
    out = 0
    for exp, coef in f.terms.items():
        c = sum(sympy.Rational(v.numerator, v.denominator) * B**k for k, v in coef.coeffs)
        mono = 1
        for s, e in zip(syms, exp):
            mono *= s**e
        out += c * mono
    return sympy.expand(out)


terms = st.dictionaries(st.tuples(*[st.integers(-2, 2)] * 3),
                        st.tuples(st.integers(-3, 3), st.integers(-2, 2)).filter(
                            lambda t: t[0] != 0), max_size=4)


@st.composite
def polys(draw):
    raw = draw(terms)
    return LaurentPoly(VARS, {e: ParamPoly({k: c}) if k >= 0 else c for e, (c, k) in raw.items()})


@given(polys(), polys())
def test_arithmetic_matches_sympy(f, g):
    assert sympy.expand(to_sympy(f + g) - (to_sympy(f) + to_sympy(g))) == 0
    assert sympy.expand(to_sympy(f * g) - to_sympy(f) * to_sympy(g)) == 0
    assert sympy.expand(to_sympy(f - g) - (to_sympy(f) - to_sympy(g))) == 0


@given(polys(), polys(), polys())
def test_ring_axioms(f, g, h):
    assert (f + g) * h == f * h + g * h
    assert (f * g) * h == f * (g * h)
    assert f * g == g * f
    assert f - f == LaurentPoly(VARS)


@given(polys())
def test_derivative_matches_sympy(f):
    for v, s in zip(VARS, SYM):
        assert sympy.expand(to_sympy(f.derivative(v)) - sympy.diff(to_sympy(f), s)) == 0


@given(polys())
def test_repr_parses_back(f):
    assert parse(repr(f), VARS) == f


@given(polys())
def test_json_roundtrip(f):
    assert LaurentPoly.from_json(f.to_json()) == f


@given(polys(), st.lists(st.integers(1, 5), min_size=3, max_size=3), st.integers(-3, 3))
def test_evaluate_matches_sympy(f, pt, b):
    point = dict(zip(VARS, pt))
    expect = to_sympy(f).subs({**dict(zip(SYM, pt)), B: b})
    assert f.evaluate(point, b) == Fraction(int(sympy.fraction(expect)[0]),
                                            int(sympy.fraction(expect)[1]))


@pytest.mark.parametrize("text", [
    "(x + y)^3 - 2*x*y^-1",
    "b6*(x*y*z)^-1 + 3/2",
    "-(1 - x - y - z)^2*x^-2",
    "x*(1 + b6*(x*y)^-1)^2 + y + z - 1",
])
def test_parse_matches_sympy(text):
    expected = sympy.expand(sympy.sympify(text.replace("^", "**"), locals={PARAMETER: B}))
    assert sympy.expand(to_sympy(parse(text, VARS)) - expected) == 0


@pytest.mark.parametrize("text", ["x +", "(x + y", "w", "x^y", "(x + y)^-1", "x^1/2"])
def test_parse_errors(text):
    with pytest.raises(LaurentError):
        parse(text, VARS)


def test_monomial_inverse_and_negative_powers():
    m = parse("2*x*y^-1", VARS)
    assert m.inverse() == parse("1/2*x^-1*y", VARS)
    assert m**-2 == parse("1/4*x^-2*y^2", VARS)
    with pytest.raises(LaurentError):
        parse("x + y", VARS).inverse()


def test_param_poly_arithmetic():
    b = ParamPoly.parameter()
    p = (b + 1) * (b - 1)
    assert p(3) == 8 and repr(b * b) == "b6^2" and not (b - b)


def test_substitution_is_functorial():
    f = parse("x^2*y^-1 + z", VARS)
    m1 = MonomialMap(VARS, {"x": parse("x*y", VARS), "y": parse("y", VARS),
                            "z": parse("z^2", VARS)})
    m2 = MonomialMap(VARS, {"x": parse("x^-1", VARS), "y": parse("y*z", VARS),
                            "z": parse("x", VARS)})
    both = MonomialMap(VARS, {v: m2(m1.assignments[v]) for v in VARS})
    assert m2(m1(f)) == both(f)


def test_substitution_rejects_inverting_sums():
    m = MonomialMap(VARS, {"x": parse("1 + y", VARS), "y": parse("y", VARS),
                           "z": parse("z", VARS)})
    with pytest.raises(LaurentError):
        substitute(parse("x^-1", VARS), m)
    num, den = substitute_fraction(parse("x^-1 + y", VARS), m)
    assert den == parse("1 + y", VARS) and num == parse("1 + y + y^2", VARS)
    assert fractions_equal((num, den), (num * 2, den * 2))


def test_rewrite_exponent_with_a_relation():
    u1 = paper_data.load("u1")
    # B1 B2 B3 = B4^2: the point 2*B4 prefers B4^2 over B1 B2 B3
    b4 = dict(u1.variables)["B4"]
    assert rewrite_exponent(tuple(2 * x for x in b4), u1.variables, u1.units) == (0, 0, 0, 2, 0, 0)


def test_rewrite_exponent_errors():
    w1 = paper_data.load("w1")
    with pytest.raises(LaurentError, match="nonnegative"):
        rewrite_exponent((0, -1, 0, 0), w1.variables, w1.units)
    two = [("p", (2, 0)), ("q", (0, 1))]
    with pytest.raises(LaurentError, match="lattice"):
        rewrite_exponent((1, 0), two)
    three = [("p", (1, 0)), ("q", (0, 1)), ("r", (1, 1)), ("s", (1, 2))]
    with pytest.raises(LaurentError, match="more than one"):
        rewrite_exponent((1, 1), three)


def test_chart_variables_must_generate_the_lattice():
    cone = [(1, 0), (0, 1)]
    assert check_chart_variables(cone, [("p", (1, 0)), ("q", (0, 1))])
    assert not check_chart_variables(cone, [("p", (2, 0)), ("q", (0, 1))])
    assert not check_chart_variables(cone, [("p", (-1, 0)), ("q", (0, 1))])


def test_single_monomial_on_its_vertex_chart_is_one():
    # the monomial with <m, v> = -1 on both rays is trivialized to 1
    chart = [("p", (1, 0)), ("q", (0, 1))]
    f = parse("X^-1*Y^-1", ["X", "Y"])
    out = chart_restrict(section_points(f), lambda v: 1, [(1, 0), (0, 1)], chart)
    assert out == LaurentPoly.constant(["p", "q"], 1)
    g = parse("X^-1*Y^-1 + X + 1", ["X", "Y"])
    out = chart_restrict(section_points(g), lambda v: 1, [(1, 0), (0, 1)], chart)
    assert out == parse("1 + p^2*q + p*q", ["p", "q"])


def test_chart_restriction_reproduces_printed_generators():
    for name in ("w1", "u1", "u2"):
        chart = paper_data.load(name)
        got = sorted(map(repr, restrict_sections(chart)))
        assert got == sorted(map(repr, chart.generator_polys()))


def test_multiplier_must_match_ray_values():
    w1 = paper_data.load("w1")
    f = w1.section_poly(w1.sections[0])
    with pytest.raises(LaurentError, match="multiplier"):
        chart_restrict(section_points(f), lambda v: 1, w1.cone, w1.variables, w1.units,
                       multiplier=(0, 0, 0, 0))
    m = chart_multiplier(w1.cone, [1, 1, 1])
    assert all(sum(a * b for a, b in zip(m, r)) == 1 for r in w1.cone)


def test_w1_generator_matches_sympy_expansion():
    w1 = paper_data.load("w1")
    d1, d2, d3, d4 = sympy.symbols("D1 D2 D3 D4")
    factored = (1 + B / d4)**2 - d1 * d2 * d3 / d4 * (1 - d1 - d2 - d3)
    assert sympy.expand(to_sympy(w1.generator_polys()[0]) - factored) == 0


def _w1_generator():
    return paper_data.load("w1").generator_polys()[0]


def test_gradient_vanishes_on_a_singular_line():
    point = {"D1": 0, "D2": 0, "D3": Fraction(1, 3), "D4": -B_VALUE}
    value, grad = eval_gradient(_w1_generator(), point, B_VALUE)
    assert value == 0 and not any(grad)


def test_gradient_is_nonzero_at_a_generic_point():
    point = {"D1": Fraction(1, 7), "D2": Fraction(1, 11), "D3": Fraction(1, 13), "D4": 2}
    _, grad = eval_gradient(_w1_generator(), point, B_VALUE)
    assert any(grad)


def test_gradient_and_hessian_match_sympy_on_singular_lines():
    g = _w1_generator()
    syms = sympy.symbols("D1 D2 D3 D4")
    expr = to_sympy(g).subs(B, sympy.Rational(5, 2))
    t = Fraction(2, 5)
    for point in ({"D1": 0, "D2": 0, "D3": t}, {"D1": t, "D2": 1 - t, "D3": 0}):
        point = {**point, "D4": -B_VALUE}
        sub = {s: sympy.Rational(point[n].numerator if isinstance(point[n], Fraction)
                                 else point[n],
                                 point[n].denominator if isinstance(point[n], Fraction) else 1)
               for s, n in zip(syms, ("D1", "D2", "D3", "D4"))}
        _, grad = eval_gradient(g, point, B_VALUE)
        assert all(sympy.diff(expr, s).subs(sub) == 0 for s in syms) and not any(grad)
        hess = eval_hessian(g, point, B_VALUE)
        expect = sympy.hessian(expr, syms).subs(sub)
        assert sympy.Matrix(hess) == expect
        assert expect.rank() == 3


def test_constant_has_zero_gradient():
    value, grad = eval_gradient(LaurentPoly.constant(VARS, 1), dict(zip(VARS, (1, 2, 3))), 0)
    assert value == 1 and grad == (0, 0, 0)

"""Laurent polynomials whose coefficients are polynomials in one parameter.

Chart restriction of sections, monomial ring maps and exact evaluation
of values, gradients and Hessians.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .lattice_core import (
    Vector,
    as_vector,
    dot,
    integer_kernel,
    integer_solve,
    rank,
    transpose,
    vadd,
    vscale,
)

PARAMETER = "b6"


class LaurentError(ValueError):
    pass


class ParamPoly:
    """Polynomial in the parameter with rational coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, object] | Sequence | int | Fraction = ()):
        if isinstance(coeffs, (int, Fraction)):
            coeffs = {0: coeffs}
        elif not isinstance(coeffs, Mapping):
            coeffs = dict(enumerate(coeffs))
        items = {}
        for k, v in coeffs.items():
            if int(k) < 0:
                raise LaurentError("parameter exponents must be nonnegative")
            v = Fraction(v)
            if v:
                items[int(k)] = v
        self.coeffs = tuple(sorted(items.items()))

    @classmethod
    def parameter(cls) -> "ParamPoly":
        return cls({1: 1})

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ParamPoly(other)
        return isinstance(other, ParamPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        other = _as_param(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs:
            out[k] = out.get(k, 0) + v
        return ParamPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly({k: -v for k, v in self.coeffs})

    def __sub__(self, other):
        return self + (-_as_param(other))

    def __rsub__(self, other):
        return _as_param(other) - self

    def __mul__(self, other):
        other = _as_param(other)
        out = {}
        for i, a in self.coeffs:
            for j, b in other.coeffs:
                out[i + j] = out.get(i + j, 0) + a * b
        return ParamPoly(out)

    __rmul__ = __mul__

    def __call__(self, b) -> Fraction:
        b = Fraction(b)
        return sum((v * b**k for k, v in self.coeffs), Fraction(0))

    def is_constant(self) -> bool:
        return all(k == 0 for k, _ in self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, v in self.coeffs:
            c = str(v)
            if k == 0:
                parts.append(c)
                continue
            b = PARAMETER + (f"^{k}" if k > 1 else "")
            parts.append(b if v == 1 else f"-{b}" if v == -1 else f"{c}*{b}")
        out = parts[0]
        for part in parts[1:]:
            out += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
        return out

    def to_json(self) -> dict:
        return {str(k): [v.numerator, v.denominator] for k, v in self.coeffs}

    @classmethod
    def from_json(cls, data: Mapping) -> "ParamPoly":
        return cls({int(k): Fraction(v[0], v[1]) for k, v in data.items()})


def _as_param(x) -> ParamPoly:
    if isinstance(x, ParamPoly):
        return x
    if isinstance(x, (int, Fraction)):
        return ParamPoly(x)
    raise TypeError(f"cannot use {type(x).__name__} as a coefficient")


class LaurentPoly:
    """Sparse Laurent polynomial over a fixed ordered list of variables."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Sequence[int], object] = ()):
        self.variables = tuple(variables)
        n = len(self.variables)
        out = {}
        for exp, coef in dict(terms).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise LaurentError("exponent length does not match the variables")
            coef = _as_param(coef)
            out[exp] = out.get(exp, ParamPoly()) + coef
        self.terms = {e: c for e, c in sorted(out.items()) if c}

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, variables, c) -> "LaurentPoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables, name: str) -> "LaurentPoly":
        variables = tuple(variables)
        exp = tuple(int(v == name) for v in variables)
        if name not in variables:
            raise LaurentError(f"unknown variable {name}")
        return cls(variables, {exp: 1})

    @classmethod
    def monomial(cls, variables, exp: Sequence[int], coef=1) -> "LaurentPoly":
        return cls(variables, {tuple(exp): coef})

    @classmethod
    def parameter(cls, variables) -> "LaurentPoly":
        return cls.constant(variables, ParamPoly.parameter())

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.variables != self.variables:
                raise LaurentError("polynomials live in different rings")
            return other
        return LaurentPoly.constant(self.variables, _as_param(other))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ParamPoly)):
            other = LaurentPoly.constant(self.variables, other)
        return (isinstance(other, LaurentPoly) and self.variables == other.variables
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.variables, tuple(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, ParamPoly()) + c
        return LaurentPoly(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, ParamPoly()) + c1 * c2
        return LaurentPoly(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = LaurentPoly.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def inverse(self) -> "LaurentPoly":
        """Inverse of a monomial with a nonzero constant coefficient."""
        if not self.is_monomial():
            raise LaurentError("only monomials can be inverted")
        (exp, coef), = self.terms.items()
        if not coef.is_constant():
            raise LaurentError("coefficient is not invertible")
        return LaurentPoly(self.variables, {tuple(-e for e in exp): 1 / coef(0)})

    # -- calculus and evaluation -----------------------------------------

    def derivative(self, name: str) -> "LaurentPoly":
        i = self.variables.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return LaurentPoly(self.variables, out)

    def evaluate(self, point: Mapping[str, object], b_value=0) -> Fraction:
        vals = [Fraction(point[v]) for v in self.variables]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c(b_value)
            for x, k in zip(vals, e):
                if k < 0 and x == 0:
                    raise ZeroDivisionError("an inverted variable is zero")
                term *= x**k
            total += term
        return total

    def specialize(self, b_value) -> "LaurentPoly":
        return LaurentPoly(self.variables, {e: c(b_value) for e, c in self.terms.items()})

    def in_variables(self, variables: Sequence[str]) -> "LaurentPoly":
        """The same polynomial in a larger ordered variable list."""
        variables = tuple(variables)
        idx = [variables.index(v) for v in self.variables]
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for i, k in zip(idx, e):
                ne[i] = k
            out[tuple(ne)] = c
        return LaurentPoly(variables, out)

    # -- text and JSON ----------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms.items():
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            coef = repr(c)
            if len(c.coeffs) > 1:
                coef = f"({coef})"
            if not mono:
                parts.append(coef)
            elif coef == "1":
                parts.append(mono)
            elif coef == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        out = parts[0]
        for part in parts[1:]:
            out += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
        return out

    def to_json(self) -> dict:
        return {"vars": list(self.variables),
                "terms": [{"exp": list(e), "coef": c.to_json()} for e, c in self.terms.items()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentPoly":
        return cls(data["vars"], {tuple(t["exp"]): ParamPoly.from_json(t["coef"])
                                  for t in data["terms"]})


# ---------------------------------------------------------------------------
# parsing of printed formulas


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def parse(text: str, variables: Sequence[str]) -> LaurentPoly:
    """Parse ``+ - * ^ ( )`` expressions in the given variables and the
    parameter ``b6``; exponents are (possibly negative) integers."""
    variables = tuple(variables)
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LaurentError(f"cannot parse {text[pos:]!r}")
        pos = m.end()
        num, name, op = m.groups()
        tokens.append(("num", num) if num else ("name", name) if name else ("op", op))
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i]

    def take(expected=None):
        nonlocal i
        tok = tokens[i]
        if expected is not None and tok != ("op", expected):
            raise LaurentError(f"expected {expected!r} in {text!r}")
        i += 1
        return tok

    def expr():
        if peek() == ("op", "+"):
            take()
        acc = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            acc = acc + term() if op == "+" else acc - term()
        return acc

    def term():
        # unary minus binds looser than ^
        if peek() == ("op", "-"):
            take()
            return -term()
        acc = power()
        while peek() == ("op", "*"):
            take()
            acc = acc * power()
        return acc

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            sign = 1
            if peek() == ("op", "-"):
                take()
                sign = -1
            kind, val = take()
            if kind != "num" or "/" in val:
                raise LaurentError("exponents must be integers")
            return base ** (sign * int(val))
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return LaurentPoly.constant(variables, Fraction(val))
        if kind == "name":
            if val == PARAMETER:
                return LaurentPoly.parameter(variables)
            return LaurentPoly.var(variables, val)
        if val == "(":
            inner = expr()
            take(")")
            return inner
        raise LaurentError(f"unexpected {val!r} in {text!r}")

    result = expr()
    if peek()[0] != "end":
        raise LaurentError(f"trailing input in {text!r}")
    return result


# ---------------------------------------------------------------------------
# monomial maps


@dataclass
class MonomialMap:
    """Assignment of a Laurent polynomial to each source variable."""

    source: tuple
    assignments: dict

    def __post_init__(self):
        self.source = tuple(self.source)
        missing = [v for v in self.source if v not in self.assignments]
        if missing:
            raise LaurentError(f"unassigned variables {missing}")
        targets = {p.variables for p in self.assignments.values()}
        if len(targets) != 1:
            raise LaurentError("images must share one ring")

    @property
    def target(self) -> tuple:
        return next(iter(self.assignments.values())).variables

    def __call__(self, f: LaurentPoly) -> LaurentPoly:
        return substitute(f, self)


def substitute(f: LaurentPoly, m: MonomialMap) -> LaurentPoly:
    """Replace each variable of ``f`` by its image and expand.  Negative
    powers are allowed only for monomial images."""
    if f.variables != m.source:
        raise LaurentError("map source does not match the polynomial ring")
    out = LaurentPoly(m.target)
    for e, c in f.terms.items():
        term = LaurentPoly.constant(m.target, c)
        for v, k in zip(f.variables, e):
            if k:
                img = m.assignments[v]
                if k < 0 and not img.is_monomial():
                    raise LaurentError(f"negative power of the non-monomial image of {v}")
                term = term * img**k
        out = out + term
    return out


def substitute_fraction(f: LaurentPoly, m: MonomialMap) -> tuple[LaurentPoly, LaurentPoly]:
    """Substitution allowing inverses of arbitrary images.

    Returns ``(numerator, denominator)`` with the denominator a product
    of powers of the inverted images.
    """
    if f.variables != m.source:
        raise LaurentError("map source does not match the polynomial ring")
    need = {}
    for e in f.terms:
        for v, k in zip(f.variables, e):
            if k < 0 and not m.assignments[v].is_monomial():
                need[v] = max(need.get(v, 0), -k)
    den = LaurentPoly.constant(m.target, 1)
    for v, k in need.items():
        den = den * m.assignments[v] ** k
    num = LaurentPoly(m.target)
    for e, c in f.terms.items():
        term = LaurentPoly.constant(m.target, c)
        for v, k in zip(f.variables, e):
            img = m.assignments[v]
            if v in need:
                term = term * img ** (k + need[v])
            elif k:
                term = term * img**k
        num = num + term
    return num, den


def compose(outer: MonomialMap, inner: MonomialMap) -> dict:
    """``outer`` after ``inner`` on each source variable of ``inner``, as
    ``(numerator, denominator)`` pairs."""
    return {v: substitute_fraction(img, outer) for v, img in inner.assignments.items()}


# ---------------------------------------------------------------------------
# exponents and charts


def rewrite_exponent(u: Sequence[int], chart_vars: Sequence[tuple[str, Sequence[int]]],
                     units: Iterable[str] = ()) -> tuple[int, ...]:
    """Integer exponents over the chart variables realizing the lattice
    point ``u``.

    Non-unit exponents must be nonnegative; among such solutions the one
    with the smallest non-unit total is returned.  At most one relation
    among the chart exponents is supported.
    """
    names = [n for n, _ in chart_vars]
    exps = [as_vector(e) for _, e in chart_vars]
    units = set(units)
    cols = transpose(exps)
    x0 = integer_solve(cols, as_vector(u))
    if x0 is None:
        raise LaurentError(f"{tuple(u)} is not in the lattice of the chart variables")
    kernel = integer_kernel(cols)
    free = [i for i, n in enumerate(names) if n not in units]
    if not kernel:
        candidates = [x0]
    elif len(kernel) == 1:
        k = kernel[0]
        lo, hi = None, None
        for i in free:
            if k[i] > 0:
                b = Fraction(-x0[i], k[i])
                lo = b if lo is None else max(lo, b)
            elif k[i] < 0:
                b = Fraction(-x0[i], k[i])
                hi = b if hi is None else min(hi, b)
        if lo is None or hi is None:
            raise LaurentError("relation does not bound the rewriting")
        candidates = [vadd(x0, vscale(t, k)) for t in range(math.ceil(lo), math.floor(hi) + 1)]
    else:
        raise LaurentError("more than one relation among chart variables")
    candidates = [x for x in candidates if all(x[i] >= 0 for i in free)]
    if not candidates:
        raise LaurentError(f"{tuple(u)} has no rewriting with nonnegative exponents")
    return min(candidates, key=lambda x: (sum(x[i] for i in free), x))


def check_chart_variables(rays: Sequence[Sequence[int]], chart_vars, units=()) -> bool:
    """Chart exponents lie in the dual cone (units on its orthogonal
    complement) and generate the whole lattice."""
    units = set(units)
    for name, e in chart_vars:
        values = [dot(e, r) for r in rays]
        if name in units and any(values):
            return False
        if any(v < 0 for v in values):
            return False
    exps = [as_vector(e) for _, e in chart_vars]
    dim = len(exps[0])
    if rank(exps) != dim:
        return False
    cols = transpose(exps)
    return all(integer_solve(cols, tuple(int(i == j) for j in range(dim))) is not None
               for i in range(dim))


def chart_multiplier(rays: Sequence[Sequence[int]], values: Sequence) -> Vector:
    """An integer ``m`` with ``<m, r> = value`` on each ray."""
    m = integer_solve([as_vector(r) for r in rays], [int(v) for v in values])
    if m is None:
        raise LaurentError("no integral multiplier for these ray values")
    return m


def chart_restrict(section_points: Sequence[tuple[Sequence[int], object]], phi, cone,
                   chart_vars: Sequence[tuple[str, Sequence[int]]],
                   units: Iterable[str] = (), multiplier: Sequence[int] | None = None
                   ) -> LaurentPoly:
    """Trivialize a section on the chart of ``cone``.

    The section is multiplied by ``z^m`` with ``<m, v> = phi(v)`` on every
    ray ``v`` of the cone and each monomial is rewritten in the chart
    variables.  ``phi`` is a callable or a mapping from rays to values.
    ``multiplier`` fixes ``m`` when the cone is not full-dimensional and a
    particular trivialization is wanted; it must agree with ``phi``.
    """
    rays = list(cone.rays) if hasattr(cone, "rays") else [as_vector(r) for r in cone]
    values = [phi(r) if callable(phi) else phi[tuple(r)] for r in rays]
    if multiplier is None:
        multiplier = chart_multiplier(rays, values)
    elif any(dot(multiplier, r) != v for r, v in zip(rays, values)):
        raise LaurentError("multiplier does not match the ray values")
    names = [n for n, _ in chart_vars]
    terms = {}
    for point, coef in section_points:
        exp = rewrite_exponent(vadd(as_vector(point), as_vector(multiplier)), chart_vars, units)
        terms[exp] = terms.get(exp, ParamPoly()) + _as_param(coef)
    return LaurentPoly(names, terms)


def section_points(f: LaurentPoly) -> list[tuple[Vector, ParamPoly]]:
    """Terms of a polynomial written in torus coordinates."""
    return [(e, c) for e, c in f.terms.items()]


def pullback_from_lattice_map(m, source_vars: Sequence[tuple[str, Sequence[int]]],
                              target_vars: Sequence[tuple[str, Sequence[int]]],
                              units: Iterable[str] = ()) -> MonomialMap:
    """Ring map induced by the transpose of ``m``: a variable with
    exponent ``u`` goes to the monomial with exponent ``m^T u``, written in
    the target chart variables."""
    names = [n for n, _ in target_vars]
    units = list(units)
    out = {}
    for name, u in source_vars:
        image = m.transpose()(as_vector(u))
        out[name] = LaurentPoly.monomial(names, rewrite_exponent(image, target_vars, units))
    return MonomialMap(tuple(n for n, _ in source_vars), out)


# ---------------------------------------------------------------------------
# identities and evaluation


def verify_identity(lhs: LaurentPoly, rhs: LaurentPoly) -> bool:
    return lhs == rhs


def verify_identity_mod(f: LaurentPoly, g: LaurentPoly, cofactor: LaurentPoly) -> bool:
    """``f == cofactor * g`` exactly."""
    return f == cofactor * g


def fractions_equal(a: tuple[LaurentPoly, LaurentPoly], b: tuple[LaurentPoly, LaurentPoly]) -> bool:
    return a[0] * b[1] == b[0] * a[1]


def eval_gradient(f: LaurentPoly, point: Mapping[str, object], b_value) -> tuple[Fraction, Vector]:
    value = f.evaluate(point, b_value)
    grad = tuple(f.derivative(v).evaluate(point, b_value) for v in f.variables)
    return value, grad


def eval_hessian(f: LaurentPoly, point: Mapping[str, object], b_value) -> tuple:
    firsts = [f.derivative(v) for v in f.variables]
    return tuple(tuple(d.derivative(w).evaluate(point, b_value) for w in f.variables)
                 for d in firsts)

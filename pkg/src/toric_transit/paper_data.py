"""Registry of the hash-pinned JSON fixtures.

Every fixture is checked against its pinned SHA-256 before parsing, so an
edited digit fails loudly instead of silently changing a result.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any

from .fan import Fan, FanError
from .lattice_core import as_vector, primitive
from .laurent import LaurentPoly, check_chart_variables, parse
from .morphism import LatticeMap
from .polytope import Polytope, hull


class FixtureError(ValueError):
    pass


PINNED = {
    "charts/u1.json": "2fc5d0bd59cfcd786a5253be4f933a26fb2bc8a5e941b3c8e31a8e7f7fdc2f9b",
    "charts/u2.json": "4d2e771da67892e73a788f986d9f7dafaf5a8c25582f59ea1c12115e3a785aee",
    "charts/w1.json": "c1b2601512de2b9fd6c2c97fdbd31a0e2730ad7186d4220571ce353c812ad2d2",
    "checks.json": "c6935fee21364ed879e6caa77d3b1fedcee01261388f7ea85d3683a24180654a",
    "fans/sigma_prime_wp.json": "582b9afa67aa618dc8325573e2a89442a6ed4bd81f59512a7355a5473efa58e7",
    "maps/h_star.json": "9468bf1febe21e9031aa766f77ec7540f97e47fd3b28bd58f6157abeb8bf32ce",
    "points/amenable_vectors.json": "541cd5fe2b34abb2d27ff748a0de003dc51c2676d3b4346ab91b9d0ea7ac0eee",
    "points/kernel_images.json": "0dd50ba35bc49589d802b9e70ef417d2e7595e5c50d6bb2da66022880c6b40e0",
    "points/nef_partition_p5.json": "d481fe3cc6f77057f80c0ee88d7294797ab53390adbcb932cc589c388fa03320",
    "points/sigma_prime_conditions.json": "4c05cea0e0bcc888d0f2914f6727eaf36c9498c7e4b0c4d72dee3e61ed2c1107",
    "points/six_triangles.json": "714cb2f54a74fc134bf5c92e5866150e69bd8f4077e78bb096e586547725dabc",
    "polytopes/delta_p24.json": "51dfaf0dbceac94826b17c08ac0b706c4557fab9f0c1cbdcb81632c10eae1ce8",
    "polytopes/delta_p5.json": "4feb3ac14576328e55ee199ffbbf7ae2209878a9bcdd7e00e240cd9d1cf6ed72",
    "polytopes/delta_star_p24.json": "d11aa82b92626369e48bcad187526169c7879d793b83e762ac8f762e14f62678",
    "polytopes/delta_star_wp.json": "2378d847744a7c0e6fa2ac226dbaa4f477617e15061ea5d7af1dcb70e96abb06",
    "polytopes/delta_wp.json": "13d8c5c6e928bc1a7522981fa0a2bc51c8b7d7fbd15de346b0b27e62b3ae7bb6",
    "polytopes/face_f1.json": "8e446910f432d1f099e5a81253841160c58a09af13fd77b0eb63a70d0317d960",
    "polytopes/nabla.json": "ca8e3cee4539d67e1303ae57b621f32846b29620ccc0f36634a5617dd3aed3d8",
    "polytopes/nabla_1.json": "e11dc1c4e2715b873c855169f9385935b74df668043ddc2dc7b5d38f55fa3b24",
    "polytopes/nabla_2.json": "ccfa3cba13c43e8209102c8bc431275dd73bd68b84b451193cdf6df5b5e0d3ca",
    "polytopes/nabla_prime_2.json": "2c9ff31376706c7d482f543a330f076b7c22c68eed8cceca779f8c9139b9c745",
}

KINDS = {"polytopes": "polytope", "fans": "fan", "maps": "map", "charts": "chart",
         "points": "points"}


@dataclass
class Chart:
    """Affine chart of a cone: coordinate monomials, sections and the
    printed ideal generators, all as exact data."""

    name: str
    lattice: str
    cone: list
    variables: list
    units: list
    relations: list
    sections: list
    generators: list
    extra: dict = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.variables]

    def poly(self, text: str) -> LaurentPoly:
        return parse(text, self.names)

    def generator_polys(self) -> list[LaurentPoly]:
        return [self.poly(g) for g in self.generators]

    def section_poly(self, section: dict) -> LaurentPoly:
        return parse(section["polynomial"], section["torus_vars"])

    def relation_exponents_hold(self) -> bool:
        """Each monomial relation holds between the chart exponents."""
        exps = dict(self.variables)
        for rel in self.relations:
            sides = []
            for side in (rel["lhs"], rel["rhs"]):
                (e, _), = self.poly(side).terms.items()
                total = [0] * len(self.cone[0])
                for name, k in zip(self.names, e):
                    total = [t + k * x for t, x in zip(total, exps[name])]
                sides.append(total)
            if sides[0] != sides[1]:
                return False
        return True


def _path(rel: str):
    return resources.files("toric_transit").joinpath("fixtures", *rel.split("/"))


def fixture_names() -> dict[str, str]:
    """Map from fixture name to its relative path (``checks.json`` excluded)."""
    return {rel.rsplit("/", 1)[1][:-5]: rel for rel in PINNED if "/" in rel}


def read_json(rel: str) -> Any:
    data = _path(rel).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if PINNED.get(rel) != digest:
        raise FixtureError(f"{rel} does not match its pinned hash")
    return json.loads(data)


def kind(name: str) -> str:
    names = fixture_names()
    if name not in names:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(names))}")
    return KINDS[names[name].split("/")[0]]


@lru_cache(maxsize=None)
def _load(name: str):
    rel = fixture_names()[name] if name in fixture_names() else None
    if rel is None:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(fixture_names()))}")
    data = read_json(rel)
    k = KINDS[rel.split("/")[0]]
    if k == "polytope":
        verts = [as_vector(v) for v in data["vertices"]]
        p = hull(verts, lattice=data.get("lattice"), name=name)
        if sorted(set(verts)) != sorted(p.vertices) or len(set(verts)) != len(verts):
            raise FixtureError(f"{name}: listed points are not exactly the vertices")
        return p
    if k == "fan":
        try:
            f = Fan.from_json(data)
        except FanError as exc:
            raise FixtureError(f"{name}: {exc}") from exc
        if any(c.dim != f.ambient_dim for c in f.maximal_cones):
            raise FixtureError(f"{name}: a maximal cone is not full-dimensional")
        return f
    if k == "map":
        return LatticeMap.from_json(data)
    if k == "chart":
        chart = Chart(
            name=data["name"], lattice=data["lattice"],
            cone=[as_vector(r) for r in data["cone"]],
            variables=[(v["name"], as_vector(v["exp"])) for v in data["variables"]],
            units=list(data["units"]), relations=list(data["relations"]),
            sections=list(data["sections"]), generators=list(data["generators"]),
            extra={k2: v for k2, v in data.items() if k2 not in {
                "name", "lattice", "cone", "variables", "units", "relations",
                "sections", "generators"}},
        )
        if any(primitive(r) != r for r in chart.cone):
            raise FixtureError(f"{name}: cone generators must be primitive")
        if not check_chart_variables(chart.cone, chart.variables, chart.units):
            raise FixtureError(f"{name}: chart variables do not fit the cone")
        if not chart.relation_exponents_hold():
            raise FixtureError(f"{name}: monomial relation fails on exponents")
        return chart
    return data


def load(name: str):
    """Parsed, invariant-checked fixture by name.

    Polytopes come back as :class:`Polytope`, fans as :class:`Fan`, maps as
    :class:`LatticeMap`, charts as :class:`Chart` and point lists as the
    raw JSON mapping.
    """
    return _load(name)


def list_checks() -> list[tuple[str, str, str]]:
    """``(check_id, title, anchor)`` for every acceptance check."""
    data = read_json("checks.json")
    return [(c["id"], c["title"], c["anchor"]) for c in data["checks"]]


def polytope(name: str) -> Polytope:
    p = load(name)
    if not isinstance(p, Polytope):
        raise FixtureError(f"{name} is not a polytope")
    return p

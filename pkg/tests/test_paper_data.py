import pytest

from toric_transit import paper_data
from toric_transit.fan import Fan
from toric_transit.morphism import LatticeMap
from toric_transit.polytope import Polytope


@pytest.mark.parametrize("name", sorted(paper_data.fixture_names()))
def test_every_fixture_loads_with_its_kind(name):
    obj = paper_data.load(name)
    expected = {"polytope": Polytope, "fan": Fan, "map": LatticeMap,
                "chart": paper_data.Chart, "points": dict}[paper_data.kind(name)]
    assert isinstance(obj, expected)


def test_tampered_hash_is_rejected(monkeypatch):
    monkeypatch.setitem(paper_data.PINNED, "polytopes/nabla.json", "0" * 64)
    paper_data._load.cache_clear()
    try:
        with pytest.raises(paper_data.FixtureError, match="pinned"):
            paper_data.load("nabla")
    finally:
        paper_data._load.cache_clear()


def test_unknown_fixture():
    with pytest.raises(KeyError):
        paper_data.load("no_such_fixture")
    with pytest.raises(KeyError):
        paper_data.kind("no_such_fixture")


def test_polytope_accessor_rejects_other_kinds():
    with pytest.raises(paper_data.FixtureError):
        paper_data.polytope("h_star")


def test_check_registry():
    checks = paper_data.list_checks()
    ids = [c[0] for c in checks]
    assert ids == [f"V{i}" for i in range(1, 15)]
    assert all(title and anchor for _, title, anchor in checks)


def test_kernel_images_follow_the_map():
    h = paper_data.load("h_star")
    for x, y in paper_data.load("kernel_images")["items"]:
        assert h(x) == tuple(y)


def test_typo_readings_are_annotated():
    for name, var in (("u1", "B2"), ("u2", "C2")):
        raw = paper_data.read_json(f"charts/{name}.json")
        entry = next(v for v in raw["variables"] if v["name"] == var)
        assert "source_note" in entry


def test_chart_relations_hold_on_exponents():
    for name in ("w1", "u1", "u2"):
        assert paper_data.load(name).relation_exponents_hold()

"""Command line front end: ``verify``, ``show`` and ``list-checks``."""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import click

from . import paper_data
from .checks import check_ids, jsonable, run_check
from .fan import Fan
from .morphism import LatticeMap
from .polytope import Polytope, is_reflexive, lattice_points


def _run_one(check_id: str) -> dict:
    return run_check(check_id).to_json()


def _select(ids: tuple[str, ...]) -> list[str]:
    known = check_ids()
    if not ids:
        raise click.UsageError("give check ids or 'all'")
    if len(ids) == 1 and ids[0].lower() == "all":
        return known
    unknown = [i for i in ids if i.upper() not in known]
    if unknown:
        raise click.UsageError(f"unknown check id(s): {', '.join(unknown)}; "
                               f"known: {', '.join(known)}")
    return sorted({i.upper() for i in ids}, key=known.index)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Exact verification of toric fans, fan morphisms and chart equations."""


@main.command()
@click.argument("ids", nargs=-1)
@click.option("--json", "json_path", type=click.Path(dir_okay=False),
              help="Write the full report to this file.")
@click.option("--serial", is_flag=True, help="Run checks one after another in this process.")
@click.option("--no-timestamp", is_flag=True,
              help="Omit the timestamp and timings so reports are byte-identical.")
def verify(ids, json_path, serial, no_timestamp):
    """Run checks IDS (for example V3 V7) or 'all'."""
    try:
        selected = _select(ids)
        list(paper_data.list_checks())
    except paper_data.FixtureError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    if serial or len(selected) == 1:
        results = [_run_one(c) for c in selected]
    else:
        workers = min(len(selected), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, selected))
    for r in results:
        if no_timestamp:
            r["elapsed_ms"] = 0
        line = f"{r['check_id']:<4} {r['status'].upper():<5} {r['title']}"
        if not no_timestamp:
            line += f"  ({r['elapsed_ms']} ms)"
        if r["status"] != "pass":
            line += f"  [{r['message']}]"
        click.echo(line)
    summary = {s: sum(r["status"] == s for r in results) for s in ("pass", "fail", "error")}
    click.echo(f"{summary['pass']} passed, {summary['fail']} failed, {summary['error']} errors")
    if json_path:
        report = {"checks": results, "summary": summary}
        if not no_timestamp:
            report["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        with open(json_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    sys.exit(0 if summary["pass"] == len(results) else 1)


@main.command("list-checks")
def list_checks():
    """List the acceptance checks."""
    for cid, title, anchor in paper_data.list_checks():
        click.echo(f"{cid:<4} {title}  <{anchor}>")


def _describe(name: str, obj, with_points: bool) -> dict:
    if isinstance(obj, Polytope):
        out = {"kind": "polytope", "lattice": obj.lattice, "dim": obj.dim,
               "vertices": obj.vertices, "facets": len(obj.facets),
               "reflexive": is_reflexive(obj) if obj.is_full_dimensional() else False}
        if with_points:
            pts = lattice_points(obj)
            out["lattice_point_count"] = len(pts)
            out["lattice_points"] = pts
        return out
    if isinstance(obj, Fan):
        index = {r: i + 1 for i, r in enumerate(obj.rays)}
        return {"kind": "fan", "ambient_dim": obj.ambient_dim, "rays": obj.rays,
                "maximal_cones": [sorted(index[r] for r in c.rays) for c in obj.maximal_cones]}
    if isinstance(obj, LatticeMap):
        return {"kind": "map", "source": obj.source, "target": obj.target,
                "matrix": obj.matrix}
    if isinstance(obj, paper_data.Chart):
        return {"kind": "chart", "lattice": obj.lattice, "cone": obj.cone,
                "variables": {n: e for n, e in obj.variables}, "units": obj.units,
                "generators": obj.generators}
    return {"kind": "points", **obj}


@main.command()
@click.argument("fixture")
@click.option("--lattice-points", is_flag=True, help="Enumerate lattice points of a polytope.")
@click.option("--json", "as_json", is_flag=True, help="Print JSON instead of text.")
def show(fixture, lattice_points, as_json):
    """Print a fixture by name."""
    try:
        obj = paper_data.load(fixture)
    except KeyError as exc:
        raise click.UsageError(str(exc.args[0])) from None
    except paper_data.FixtureError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    info = _describe(fixture, obj, lattice_points)
    if as_json:
        click.echo(json.dumps(jsonable(info), indent=2))
        return
    click.echo(f"{fixture} ({info['kind']})")
    if info["kind"] == "polytope":
        click.echo(f"  lattice {info['lattice']}, dim {info['dim']}, "
                   f"{len(info['vertices'])} vertices, {info['facets']} facets, "
                   f"reflexive: {info['reflexive']}")
        for v in info["vertices"]:
            click.echo(f"  {tuple(v)}")
        if "lattice_point_count" in info:
            click.echo(f"  lattice points: {info['lattice_point_count']}")
    elif info["kind"] == "fan":
        click.echo(f"  {len(info['rays'])} rays, {len(info['maximal_cones'])} maximal cones")
        for i, r in enumerate(info["rays"], 1):
            click.echo(f"  r{i} = {tuple(r)}")
        for c in info["maximal_cones"]:
            click.echo("  {" + ", ".join(f"r{i}" for i in c) + "}")
    elif info["kind"] == "map":
        m = info["matrix"]
        click.echo(f"  {len(m)}x{len(m[0])} matrix, {info['source']} -> {info['target']}")
        for row in m:
            click.echo("  " + " ".join(f"{x:3d}" for x in row))
    elif info["kind"] == "chart":
        click.echo(f"  cone: {[tuple(r) for r in info['cone']]}")
        for n, e in info["variables"].items():
            click.echo(f"  {n} = z^{tuple(e)}" + ("  (unit)" if n in info["units"] else ""))
        for g in info["generators"]:
            click.echo(f"  generator: {g}")
    else:
        click.echo(json.dumps(jsonable(info), indent=2))


if __name__ == "__main__":
    main()

"""
Reading and writing graphs, functions, boundary data and domains.

Rationals are written as "p/q" strings and floats as JSON numbers, so a
file read back reproduces the same values. A path of ``-`` means stdin or
stdout.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, TextIO

from inflap.eikonal import BoundaryData
from inflap.euclid_grid import Domain, parse_domain
from inflap.metric_graph import Edge, GraphPoint, MetricGraph
from inflap.numeric import format_scalar, parse_scalar
from inflap.perron_solver import NodeFunction, discretize
from inflap.pl_calculus import PLFunction

_LOG = logging.getLogger(__name__)

STDIO = "-"


def read_json(source: str | Path) -> Any:
    if str(source) == STDIO:
        return json.load(sys.stdin)
    with open(source, "r", encoding="utf-8") as f:
        return json.load(f)


def write_text(text: str, target: str | Path | None) -> None:
    if target is None or str(target) == STDIO:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    Path(target).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    _LOG.info("Wrote %s", target)


def dumps(data: Any, human: bool = False) -> str:
    return json.dumps(data, indent=2 if human else None, sort_keys=human)


def write_json(data: Any, target: str | Path | None, human: bool = False) -> None:
    write_text(dumps(data, human), target)


def _base_dir(source: str | Path) -> Path:
    return Path.cwd() if str(source) == STDIO else Path(source).resolve().parent


# -- Graphs --------------------------------------------------------------------


def _parse_point(raw: Mapping[str, Any]) -> GraphPoint:
    if "vertex" in raw:
        return GraphPoint.at_vertex(str(raw["vertex"]))
    return GraphPoint(str(raw["edge"]), parse_scalar(raw["t"]))


def parse_graph(raw: Mapping[str, Any]) -> MetricGraph:
    """MetricGraph from its JSON form; the graph is not validated here."""
    try:
        edges = [
            Edge(str(e["id"]), str(e["from"]), str(e["to"]), parse_scalar(e["length"]))
            for e in raw["edges"]
        ]
        return MetricGraph(
            [str(v) for v in raw["vertices"]],
            edges,
            [str(v) for v in raw["boundary"]],
            points={str(k): _parse_point(p) for k, p in raw.get("points", {}).items()},
            positions={str(k): (float(x), float(y)) for k, (x, y) in raw.get("positions", {}).items()},
        )
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed graph file: missing or bad field {err}") from None


def graph_to_dict(g: MetricGraph) -> dict[str, Any]:
    out: dict[str, Any] = {
        "vertices": list(g.vertices),
        "edges": [
            {"id": e.id, "from": e.start, "to": e.end, "length": format_scalar(e.length)} for e in g.edges
        ],
        "boundary": sorted(g.boundary),
    }
    if g.points:
        out["points"] = {name: p.to_dict() for name, p in sorted(g.points.items())}
    if g.positions:
        out["positions"] = {v: list(xy) for v, xy in g.positions.items()}
    return out


def load_graph(source: str | Path) -> MetricGraph:
    return parse_graph(read_json(source))


def _graph_ref(raw: Any, base: Path) -> MetricGraph:
    if isinstance(raw, Mapping):
        return parse_graph(raw)
    if isinstance(raw, str):
        path = Path(raw)
        return load_graph(path if path.is_absolute() else base / path)
    raise ValueError("function file needs a graph path or an inline graph")


# -- Functions -----------------------------------------------------------------


def parse_function(raw: Mapping[str, Any], base: Path | None = None, graph: MetricGraph | None = None):
    """PLFunction or NodeFunction from its JSON form.

    ``graph`` overrides the file's own graph reference; relative graph paths
    resolve against ``base``.
    """
    base = base or Path.cwd()
    if not isinstance(raw, Mapping):
        raise ValueError("function file must hold a JSON object")
    try:
        g = graph if graph is not None else _graph_ref(raw["graph"], base)
        if raw.get("kind") == "nodes":
            return _parse_nodes(raw, g)
        if not isinstance(raw["edges"], Mapping):
            raise ValueError('"edges" must map edge ids to [t, value] pairs')
        pieces = {
            str(eid): [(parse_scalar(t), parse_scalar(v)) for t, v in items] for eid, items in raw["edges"].items()
        }
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed function file: missing or bad field {err}") from None
    return PLFunction(g, pieces)


def _parse_nodes(raw: Mapping[str, Any], g: MetricGraph) -> NodeFunction:
    constraint = [g.resolve(str(label)) for label in raw.get("constraint", [])]
    disc = discretize(g, parse_scalar(raw["h"]), constraint)
    index = {_label(p): k for k, p in enumerate(disc.nodes)}
    values = [0.0] * disc.size
    seen = set()
    rows = raw["nodes"]
    pairs = isinstance(rows, (list, tuple)) and all(isinstance(row, (list, tuple)) and len(row) == 2 for row in rows)
    if not pairs:
        raise ValueError('"nodes" must be a list of [label, value] pairs')
    for label, value in rows:
        if str(label) not in index:
            raise ValueError(f"node {label!r} is not part of the discretization at h={disc.h}")
        k = index[str(label)]
        values[k] = float(value)
        seen.add(k)
    if len(seen) != disc.size:
        raise ValueError(f"node file lists {len(seen)} of {disc.size} nodes")
    return NodeFunction(disc, values)


def load_function(source: str | Path, graph: MetricGraph | None = None):
    return parse_function(read_json(source), _base_dir(source), graph)


def _label(point: GraphPoint) -> str:
    if point.is_vertex:
        return point.vertex
    t = point.t
    return f"{point.edge}:{t}" if isinstance(t, Fraction) else f"{point.edge}:{float(t)!r}"


def function_to_dict(u: PLFunction | NodeFunction, graph_ref: str | None = None) -> dict[str, Any]:
    """JSON form; the graph goes inline unless a path is given."""
    if isinstance(u, NodeFunction):
        g = u.disc.graph
        return {
            "kind": "nodes",
            "graph": graph_ref or graph_to_dict(g),
            "h": format_scalar(u.disc.h),
            "constraint": [_label(p) for p in u.disc.constraint],
            "nodes": [[_label(p), float(v)] for p, v in zip(u.disc.nodes, u.values)],
        }
    return {
        "graph": graph_ref or graph_to_dict(u.graph),
        "edges": {
            eid: [[format_scalar(t), format_scalar(v)] for t, v in zip(*u.edge_breakpoints(eid))]
            for eid in u.graph.edge_ids
        },
    }


def csv_rows(u: PLFunction | NodeFunction, step: object | None = None) -> list[tuple[str, Any, Any]]:
    """(edge_id, t, value) rows: node values, or PL samples at ``step`` plus every breakpoint."""
    if isinstance(u, NodeFunction):
        return [
            (eid, format_scalar(t), float(u.values[k])) for eid, chain in u.disc.edge_nodes.items() for t, k in chain
        ]
    if step is None:
        return [
            (eid, format_scalar(t), format_scalar(v))
            for eid in u.graph.edge_ids
            for t, v in zip(*u.edge_breakpoints(eid))
        ]
    return [(eid, format_scalar(t), format_scalar(v)) for eid, t, v in u.sample(step)]


def write_csv(rows: list[tuple[str, Any, Any]], target: str | Path | None) -> None:
    if target is None or str(target) == STDIO:
        _write_rows(rows, sys.stdout)
        return
    with open(target, "w", encoding="utf-8", newline="") as f:
        _write_rows(rows, f)
    _LOG.info("Wrote %d rows to %s", len(rows), target)


def _write_rows(rows: list[tuple[str, Any, Any]], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("edge_id", "t", "value"))
    writer.writerows(rows)


# -- Boundary data and domains -------------------------------------------------


def load_boundary_data(source: str | Path) -> BoundaryData:
    raw = read_json(source)
    if not isinstance(raw, Mapping) or not isinstance(raw.get("g"), Mapping):
        raise ValueError('boundary data must be an object {"g": {vertex: value}}')
    return BoundaryData.parse(raw["g"])


def load_domain(source: str | Path) -> Domain:
    raw = read_json(source)
    if not isinstance(raw, Mapping):
        raise ValueError("domain file must hold a JSON object")
    return parse_domain(raw)

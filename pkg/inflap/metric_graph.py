"""
Finite metric graphs with exact shortest-path distances.

A metric graph is the union of its edges, each an interval of the given
length, with the intrinsic (shortest path) metric. The boundary is an
explicit set of vertices; everything else is the domain Omega.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any, Callable, Iterable, Mapping

import networkx as nx
import numpy as np
from networkx.utils import UnionFind

from inflap.numeric import Scalar, close, format_scalar, is_exact, leq, parse_scalar

if TYPE_CHECKING:
    from inflap.pl_calculus import PLFunction

_LOG = logging.getLogger(__name__)

INF = math.inf

# Violation kinds reported by validate()
NONPOSITIVE_LENGTH = "nonpositive edge length"
UNKNOWN_ENDPOINT = "unknown endpoint"
UNKNOWN_BOUNDARY = "boundary vertex unknown"
EMPTY_BOUNDARY = "boundary empty"
BOUNDARY_ISOLATED = "boundary vertex has degree 0"
NOT_CONNECTED = "graph not connected"
EMPTY_INTERIOR = "interior empty"
INTERIOR_NOT_CONNECTED = "interior not connected"


@dataclass(frozen=True)
class Edge:
    id: str
    start: str
    end: str
    length: Scalar

    @property
    def is_loop(self) -> bool:
        return self.start == self.end

    def endpoint(self, side: int) -> str:
        return self.start if side == 0 else self.end


@dataclass(frozen=True)
class GraphPoint:
    """Canonical location on a graph: a vertex, or an edge id with 0 < t < length."""

    edge: str | None = None
    t: Scalar = Fraction(0)
    vertex: str | None = None

    @classmethod
    def at_vertex(cls, vertex: str) -> GraphPoint:
        return cls(None, Fraction(0), vertex)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def sort_key(self) -> tuple:
        if self.vertex is not None:
            return (1, self.vertex, 0.0)
        return (0, self.edge, float(self.t))

    def to_dict(self) -> dict[str, Any]:
        if self.vertex is not None:
            return {"vertex": self.vertex}
        return {"edge": self.edge, "t": format_scalar(self.t)}

    def __str__(self) -> str:
        if self.vertex is not None:
            return self.vertex
        return f"{self.edge}:{self.t}"


@dataclass(frozen=True)
class Violation:
    kind: str
    element: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.element}" if self.element else self.kind


class GraphError(ValueError):
    """Raised when an operation needs a valid graph and gets an invalid one."""

    def __init__(self, violations: list[Violation]) -> None:
        self.violations = violations
        super().__init__("invalid graph: " + "; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class RidgeSet:
    """Maximizers of the boundary distance (the high ridge) and the inradius."""

    points: tuple[GraphPoint, ...]
    value: Scalar

    def to_dict(self) -> dict[str, Any]:
        return {"r_inf": format_scalar(self.value), "points": [p.to_dict() for p in self.points]}


class MetricGraph:
    """Finite metric graph with a designated boundary vertex set.

    Instances are immutable; derived data (networkx view, single-source
    distances, ridge) is computed on first use behind a lock.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[Edge],
        boundary: Iterable[str],
        *,
        points: Mapping[str, GraphPoint] | None = None,
        positions: Mapping[str, tuple[float, float]] | None = None,
    ) -> None:
        self._vertices = tuple(dict.fromkeys(vertices))
        self._edges: dict[str, Edge] = {}
        for edge in edges:
            if edge.id in self._edges:
                raise ValueError(f"duplicate edge id {edge.id!r}")
            self._edges[edge.id] = Edge(edge.id, edge.start, edge.end, parse_scalar(edge.length))
        self._edge_ids = tuple(sorted(self._edges))
        self._boundary = frozenset(boundary)
        self._exact = all(isinstance(e.length, Fraction) for e in self._edges.values())
        self._incidence: dict[str, list[tuple[str, int]]] = {v: [] for v in self._vertices}
        for eid in self._edge_ids:
            edge = self._edges[eid]
            self._incidence.setdefault(edge.start, []).append((eid, 0))
            self._incidence.setdefault(edge.end, []).append((eid, 1))
        self._positions = {v: (float(x), float(y)) for v, (x, y) in (positions or {}).items()}
        self._lock = threading.RLock()
        self._cache: dict[Any, Any] = {}
        self._points: dict[str, GraphPoint] = {}
        for name, point in (points or {}).items():
            self._points[name] = self.canonical(point)

    # -- Builders --------------------------------------------------------------

    @classmethod
    def interval(cls, length: object = 1) -> MetricGraph:
        """The interval [0, L] as one edge ``e`` from ``a`` to ``b``, both boundary."""
        return cls(["a", "b"], [Edge("e", "a", "b", parse_scalar(length))], ["a", "b"])

    @classmethod
    def star(cls, legs: int = 3, length: object = 1) -> MetricGraph:
        """Star with center ``c`` and ``legs`` edges to boundary leaves ``l0``, ``l1``..."""
        leaves = [f"l{i}" for i in range(legs)]
        edges = [Edge(f"e{i}", "c", leaf, parse_scalar(length)) for i, leaf in enumerate(leaves)]
        return cls(["c", *leaves], edges, leaves)

    # -- Structure -------------------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(self._edges[eid] for eid in self._edge_ids)

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return self._edge_ids

    @property
    def boundary(self) -> frozenset[str]:
        return self._boundary

    @property
    def interior_vertices(self) -> tuple[str, ...]:
        return tuple(v for v in self._vertices if v not in self._boundary)

    @property
    def exact(self) -> bool:
        """True when every length is rational, so distances are exact."""
        return self._exact

    @property
    def points(self) -> Mapping[str, GraphPoint]:
        return dict(self._points)

    @property
    def positions(self) -> Mapping[str, tuple[float, float]]:
        return dict(self._positions)

    def zero(self) -> Scalar:
        return Fraction(0) if self._exact else 0.0

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise ValueError(f"unknown edge {edge_id!r}") from None

    def incident(self, vertex: str) -> tuple[tuple[str, int], ...]:
        """(edge id, side) pairs leaving ``vertex``; side 0 is the edge start. Loops appear twice."""
        return tuple(self._incidence.get(vertex, ()))

    def degree(self, vertex: str) -> int:
        return len(self._incidence.get(vertex, ()))

    def total_length(self) -> Scalar:
        return sum((e.length for e in self._edges.values()), self.zero())

    def is_tree(self) -> bool:
        graph = self.nx_graph()
        return graph.number_of_nodes() > 0 and nx.is_tree(graph)

    def leaves_are_boundary(self) -> bool:
        return all(v in self._boundary for v in self._vertices if self.degree(v) == 1)

    @property
    def signature(self) -> tuple:
        return (
            self._vertices,
            tuple((e.id, e.start, e.end, e.length) for e in self.edges),
            tuple(sorted(self._boundary)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return self is other or self.signature == other.signature

    def __hash__(self) -> int:
        return hash(self.signature)

    def __repr__(self) -> str:
        return (
            f"MetricGraph({len(self._vertices)} vertices, {len(self._edges)} edges, "
            f"{len(self._boundary)} boundary)"
        )

    # -- Points ----------------------------------------------------------------

    def point(self, edge_id: str, t: object) -> GraphPoint:
        """Canonical point at arclength ``t`` from the start of ``edge_id``."""
        edge = self.edge(edge_id)
        t = parse_scalar(t) if not isinstance(t, (Fraction, float)) else t
        if not (leq(0, t) and leq(t, edge.length)):
            raise ValueError(f"t={t} outside [0, {edge.length}] on edge {edge_id!r}")
        if close(t, 0):
            return GraphPoint.at_vertex(edge.start)
        if close(t, edge.length):
            return GraphPoint.at_vertex(edge.end)
        return GraphPoint(edge_id, t)

    def vertex_point(self, vertex: str) -> GraphPoint:
        if vertex not in self._incidence:
            raise ValueError(f"unknown vertex {vertex!r}")
        return GraphPoint.at_vertex(vertex)

    def canonical(self, point: GraphPoint) -> GraphPoint:
        if point.is_vertex:
            return self.vertex_point(point.vertex)
        return self.point(point.edge, point.t)

    def check_point(self, point: GraphPoint) -> None:
        if point.is_vertex:
            self.vertex_point(point.vertex)
            return
        edge = self.edge(point.edge)
        if not 0 < point.t < edge.length:
            raise ValueError(f"point {point} is not canonical on edge {edge.id!r}")

    def resolve(self, label: str) -> GraphPoint:
        """Named point, vertex id, or ``edge:t``."""
        if label in self._points:
            return self._points[label]
        if label in self._incidence:
            return GraphPoint.at_vertex(label)
        if ":" in label:
            edge_id, t = label.rsplit(":", 1)
            return self.point(edge_id, parse_scalar(t))
        raise ValueError(f"cannot resolve point {label!r}")

    def is_boundary(self, point: GraphPoint) -> bool:
        return point.is_vertex and point.vertex in self._boundary

    # -- Distances -------------------------------------------------------------

    def memo(self, key: Any, factory: Callable[[], Any]) -> Any:
        with self._lock:
            if key not in self._cache:
                self._cache[key] = factory()
            return self._cache[key]

    def nx_graph(self) -> nx.MultiGraph:
        def build() -> nx.MultiGraph:
            graph = nx.MultiGraph()
            graph.add_nodes_from(self._incidence)
            for edge in self._edges.values():
                graph.add_edge(edge.start, edge.end, key=edge.id, weight=edge.length)
            return graph

        return self.memo("nx", build)

    def vertex_distances(self, vertex: str) -> Mapping[str, Scalar]:
        """Shortest-path distances from a vertex to every reachable vertex."""
        return self.memo(
            ("from", vertex),
            lambda: nx.single_source_dijkstra_path_length(self.nx_graph(), vertex, weight="weight"),
        )

    def boundary_vertex_distances(self) -> Mapping[str, Scalar]:
        """d(v, boundary) for every vertex v."""
        def build() -> dict[str, Scalar]:
            sources = [v for v in self._boundary if v in self._incidence]
            if not sources:
                return {v: INF for v in self._incidence}
            found = nx.multi_source_dijkstra_path_length(self.nx_graph(), sources, weight="weight")
            return {v: found.get(v, INF) for v in self._incidence}

        return self.memo("boundary", build)

    def distances_from(self, point: GraphPoint) -> dict[str, Scalar]:
        """Distances from an arbitrary point to every vertex."""
        if point.is_vertex:
            return dict(self.vertex_distances(point.vertex))
        edge = self.edge(point.edge)
        from_start = self.vertex_distances(edge.start)
        from_end = self.vertex_distances(edge.end)
        out: dict[str, Scalar] = {}
        for v in self._incidence:
            out[v] = min(point.t + from_start.get(v, INF), edge.length - point.t + from_end.get(v, INF))
        return out


def _route(distances: Mapping[str, Scalar], graph: MetricGraph, q: GraphPoint) -> Scalar:
    if q.is_vertex:
        return distances.get(q.vertex, INF)
    edge = graph.edge(q.edge)
    return min(distances.get(edge.start, INF) + q.t, distances.get(edge.end, INF) + edge.length - q.t)


# -- Validation ----------------------------------------------------------------


def validate(g: MetricGraph) -> list[Violation]:
    """All violated graph invariants; an empty list means the graph is valid."""
    return list(g.memo("violations", lambda: _collect_violations(g)))


def _collect_violations(g: MetricGraph) -> list[Violation]:
    found: list[Violation] = []
    known = set(g.vertices)
    for edge in g.edges:
        if not edge.length > 0:
            found.append(Violation(NONPOSITIVE_LENGTH, edge.id))
        for end in (edge.start, edge.end):
            if end not in known:
                found.append(Violation(UNKNOWN_ENDPOINT, f"{edge.id}->{end}"))
    for v in sorted(g.boundary - known):
        found.append(Violation(UNKNOWN_BOUNDARY, v))
    if not g.boundary:
        found.append(Violation(EMPTY_BOUNDARY, ""))

    graph = g.nx_graph()
    connected = graph.number_of_nodes() > 0 and nx.is_connected(graph)
    if not connected:
        found.append(Violation(NOT_CONNECTED, ""))
    for v in sorted(g.boundary & known):
        if g.degree(v) == 0:
            found.append(Violation(BOUNDARY_ISOLATED, v))

    # Omega is only examined on a connected graph; otherwise the cause is already reported
    if connected and g.boundary:
        components = _interior_components(g)
        if components == 0:
            found.append(Violation(EMPTY_INTERIOR, ""))
        elif components > 1:
            found.append(Violation(INTERIOR_NOT_CONNECTED, f"{components} components"))
    return found


def _interior_components(g: MetricGraph) -> int:
    """Number of connected components of the graph minus its boundary vertices."""
    parts = UnionFind()
    elements = []
    for v in g.interior_vertices:
        elements.append(("v", v))
        parts[("v", v)]
    for edge in g.edges:
        key = ("e", edge.id)
        elements.append(key)
        parts[key]
        for end in (edge.start, edge.end):
            if end not in g.boundary:
                parts.union(key, ("v", end))
    return len({parts[x] for x in elements})


def require_valid(g: MetricGraph) -> None:
    violations = validate(g)
    if violations:
        raise GraphError(violations)


# -- Distance queries ----------------------------------------------------------


def point_distance(g: MetricGraph, p: GraphPoint, q: GraphPoint) -> Scalar:
    """Intrinsic distance between two points of the graph."""
    g.check_point(p)
    g.check_point(q)
    if p == q:
        return g.zero()
    best = _route(g.distances_from(p), g, q)
    if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
        best = min(best, abs(p.t - q.t))
    return best


def boundary_distance_field(g: MetricGraph) -> PLFunction:
    """x -> d(x, boundary) as an exact piecewise-linear function."""
    from inflap.pl_calculus import field_from_vertex_values

    def build() -> PLFunction:
        require_valid(g)
        return field_from_vertex_values(g, g.boundary_vertex_distances(), 1)

    return g.memo("boundary_field", build)


def inradius_and_ridge(g: MetricGraph) -> RidgeSet:
    """R = max d(., boundary) and every point where it is attained."""

    def build() -> RidgeSet:
        field = boundary_distance_field(g)
        value = max(v for eid in g.edge_ids for v in field.edge_breakpoints(eid)[1])
        points: set[GraphPoint] = set()
        for eid in g.edge_ids:
            ts, vs = field.edge_breakpoints(eid)
            for k in range(len(ts) - 1):
                if close(vs[k], value) and close(vs[k + 1], value):
                    raise RuntimeError(f"distance plateau on edge {eid!r}; slopes must be +-1")
            for t, v in zip(ts, vs):
                if close(v, value):
                    points.add(g.point(eid, t))
        ridge = RidgeSet(tuple(sorted(points, key=GraphPoint.sort_key)), value)
        _LOG.debug("Inradius %s attained at %s", value, ", ".join(map(str, ridge.points)))
        return ridge

    return g.memo("ridge", build)


# -- Subdomains ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Subdomain:
    """Open subset of the graph: a finite union of edge intervals plus the vertices it contains."""

    graph: MetricGraph
    intervals: Mapping[str, tuple[tuple[Scalar, Scalar], ...]]
    vertices: frozenset[str] = frozenset()

    @classmethod
    def edge_interval(cls, g: MetricGraph, edge_id: str, lo: object, hi: object) -> Subdomain:
        edge = g.edge(edge_id)
        lo, hi = parse_scalar(lo), parse_scalar(hi)
        if not 0 <= lo < hi <= edge.length:
            raise ValueError(f"interval ({lo}, {hi}) not inside edge {edge_id!r}")
        return cls(g, {edge_id: ((lo, hi),)}, frozenset())

    @property
    def is_empty(self) -> bool:
        return not self.vertices and not any(self.intervals.values())

    def length(self) -> Scalar:
        return sum((hi - lo for spans in self.intervals.values() for lo, hi in spans), self.graph.zero())

    def contains(self, point: GraphPoint) -> bool:
        if point.is_vertex:
            return point.vertex in self.vertices
        return any(lo < point.t < hi for lo, hi in self.intervals.get(point.edge, ()))

    def boundary_points(self) -> tuple[GraphPoint, ...]:
        """The finitely many cut points forming the topological boundary."""
        found: set[GraphPoint] = set()
        for eid, spans in self.intervals.items():
            for lo, hi in spans:
                for t in (lo, hi):
                    p = self.graph.point(eid, t)
                    if not (p.is_vertex and p.vertex in self.vertices):
                        found.add(p)
        return tuple(sorted(found, key=GraphPoint.sort_key))

    def compactly_contained(self) -> bool:
        """True when the closure stays away from the boundary of Omega."""
        if self.is_empty:
            return False
        if self.vertices & self.graph.boundary:
            return False
        return not any(self.graph.is_boundary(p) for p in self.boundary_points())

    def sample(self, rng: np.random.Generator, n: int) -> list[GraphPoint]:
        """``n`` points drawn uniformly (by length) from the subdomain."""
        spans = [(eid, lo, hi) for eid, items in self.intervals.items() for lo, hi in items]
        if not spans:
            return [GraphPoint.at_vertex(v) for v in sorted(self.vertices)][:n]
        weights = np.array([float(hi - lo) for _, lo, hi in spans])
        weights /= weights.sum()
        out = []
        for k in rng.choice(len(spans), size=n, p=weights):
            eid, lo, hi = spans[k]
            t = float(lo) + float(hi - lo) * rng.uniform(0.0, 1.0)
            if not float(lo) < t < float(hi):
                t = float(lo + hi) / 2
            out.append(self.graph.point(eid, t))
        return out


def ball(g: MetricGraph, center: GraphPoint, r: object) -> Subdomain:
    """Open ball B_r(center) as a union of edge intervals."""
    from inflap.pl_calculus import distance_field

    r = parse_scalar(r)
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    field = distance_field(g, center)
    inside = frozenset(v for v in g.vertices if field.vertex_value(v) < r)
    intervals: dict[str, tuple[tuple[Scalar, Scalar], ...]] = {}
    for eid in g.edge_ids:
        spans: list[list[Scalar]] = []
        for t0, f0, t1, f1 in field.segments(eid):
            if f0 >= r and f1 >= r:
                continue
            lo, hi = t0, t1
            if f1 >= r:
                hi = t0 + (r - f0) / (f1 - f0) * (t1 - t0)
            elif f0 >= r:
                lo = t1 - (r - f1) / (f0 - f1) * (t1 - t0)
            if spans and close(spans[-1][1], lo):
                spans[-1][1] = hi
            else:
                spans.append([lo, hi])
        if spans:
            intervals[eid] = tuple((lo, hi) for lo, hi in spans if lo < hi)
    return Subdomain(g, intervals, inside)


# -- Random instances ----------------------------------------------------------


def random_graph(rng: np.random.Generator, n_vertices: int = 6, extra_edges: int = 2) -> MetricGraph:
    """Connected random graph with rational lengths whose degree-1 vertices form the boundary."""
    if n_vertices < 2:
        raise ValueError("need at least two vertices")
    for _ in range(100):
        names = [f"v{i}" for i in range(n_vertices)]
        edges: list[Edge] = []
        for i in range(1, n_vertices):
            parent = int(rng.integers(0, i))
            edges.append(Edge(f"e{len(edges)}", names[parent], names[i], _random_length(rng)))
        for _ in range(int(rng.integers(0, extra_edges + 1))):
            a, b = (names[int(k)] for k in rng.integers(0, n_vertices, size=2))
            edges.append(Edge(f"e{len(edges)}", a, b, _random_length(rng)))
        degree: dict[str, int] = {v: 0 for v in names}
        for edge in edges:
            degree[edge.start] += 1
            degree[edge.end] += 1
        boundary = [v for v in names if degree[v] == 1]
        if not boundary:
            names.append("b0")
            edges.append(Edge(f"e{len(edges)}", names[int(rng.integers(0, n_vertices))], "b0", _random_length(rng)))
            boundary = ["b0"]
        g = MetricGraph(names, edges, boundary)
        if not validate(g):
            return g
    raise RuntimeError("could not generate a valid random graph")


def _random_length(rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(1, 9)), int(rng.choice([1, 2, 4])))


def random_point(g: MetricGraph, rng: np.random.Generator, *, exact: bool = False) -> GraphPoint:
    """A point in an edge interior, edges weighted by length."""
    weights = np.array([float(e.length) for e in g.edges])
    edge = g.edges[int(rng.choice(len(weights), p=weights / weights.sum()))]
    if exact and is_exact(edge.length):
        return g.point(edge.id, edge.length * Fraction(int(rng.integers(1, 64)), 64))
    t = float(edge.length) * rng.uniform(0.0, 1.0)
    if not 0 < t < float(edge.length):
        t = float(edge.length) / 2
    return g.point(edge.id, t)

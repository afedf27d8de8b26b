"""
Continuous piecewise-linear functions on metric graphs.

Values, one-sided derivatives, slopes, distance cones, pointwise minima and
scalar composition. Everything is exact when the graph and the data are
rational.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

from inflap.const import COMPOSE_MAX_DEPTH, COMPOSE_TOL
from inflap.metric_graph import INF, GraphPoint, MetricGraph, point_distance
from inflap.numeric import Scalar, close, dedupe_sorted, is_exact, leq, parse_scalar, tolerance, zero_like

_LOG = logging.getLogger(__name__)

Pieces = tuple[tuple[Scalar, ...], tuple[Scalar, ...]]


@dataclass(frozen=True)
class SlopeTriple:
    slope: Scalar
    subslope: Scalar
    superslope: Scalar


class PLFunction:
    """Continuous function, linear between per-edge breakpoints.

    Each edge carries strictly increasing parameters ``0 = t0 < ... < tk = length``
    and the values at them. Traces of incident edges must agree at vertices.
    """

    __slots__ = ("_graph", "_pieces", "_vertex_values")

    def __init__(
        self,
        graph: MetricGraph,
        pieces: Mapping[str, Sequence[tuple[object, object]]],
    ) -> None:
        self._graph = graph
        self._pieces: dict[str, Pieces] = {}
        missing = set(graph.edge_ids) - set(pieces)
        if missing:
            raise ValueError(f"no breakpoints for edges {sorted(missing)}")
        for eid in graph.edge_ids:
            self._pieces[eid] = _normalize_edge(graph, eid, pieces[eid])
        unknown = set(pieces) - set(graph.edge_ids)
        if unknown:
            raise ValueError(f"breakpoints for unknown edges {sorted(unknown)}")
        self._vertex_values: dict[str, Scalar] = {}
        for eid in graph.edge_ids:
            edge = graph.edge(eid)
            ts, vs = self._pieces[eid]
            for vertex, value in ((edge.start, vs[0]), (edge.end, vs[-1])):
                seen = self._vertex_values.setdefault(vertex, value)
                if not close(seen, value):
                    raise ValueError(f"discontinuity at vertex {vertex!r}: {seen} vs {value} (edge {eid!r})")

    @property
    def graph(self) -> MetricGraph:
        return self._graph

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for ts, vs in self._pieces.values() for x in (*ts, *vs))

    def edge_breakpoints(self, edge_id: str) -> Pieces:
        try:
            return self._pieces[edge_id]
        except KeyError:
            raise ValueError(f"unknown edge {edge_id!r}") from None

    def vertex_value(self, vertex: str) -> Scalar:
        try:
            return self._vertex_values[vertex]
        except KeyError:
            raise ValueError(f"unknown or isolated vertex {vertex!r}") from None

    def segments(self, edge_id: str) -> Iterator[tuple[Scalar, Scalar, Scalar, Scalar]]:
        ts, vs = self.edge_breakpoints(edge_id)
        for k in range(len(ts) - 1):
            yield ts[k], vs[k], ts[k + 1], vs[k + 1]

    def slopes(self, edge_id: str) -> list[Scalar]:
        return [(v1 - v0) / (t1 - t0) for t0, v0, t1, v1 in self.segments(edge_id)]

    def breakpoints(self) -> Iterator[GraphPoint]:
        """Every vertex and interior breakpoint, each once."""
        for v in self._graph.vertices:
            if v in self._vertex_values:
                yield GraphPoint.at_vertex(v)
        for eid in self._graph.edge_ids:
            ts, _ = self._pieces[eid]
            for t in ts[1:-1]:
                yield GraphPoint(eid, t)

    def __call__(self, point: GraphPoint) -> Scalar:
        return self.value(point)

    def value(self, point: GraphPoint) -> Scalar:
        if point.is_vertex:
            return self.vertex_value(point.vertex)
        ts, vs = self.edge_breakpoints(point.edge)
        return _interpolate(ts, vs, point.t)

    def values(self) -> list[Scalar]:
        return [v for _, vs in self._pieces.values() for v in vs]

    def min_value(self) -> Scalar:
        return min(self.values())

    def max_value(self) -> Scalar:
        return max(self.values())

    def max_slope(self) -> Scalar:
        """Largest absolute segment slope: a global Lipschitz constant."""
        return max(abs(s) for eid in self._graph.edge_ids for s in self.slopes(eid))

    def map_values(self, fn: Callable[[Scalar], Scalar]) -> PLFunction:
        """Apply an affine map to the values; breakpoints are kept."""
        return PLFunction(
            self._graph,
            {eid: list(zip(ts, (fn(v) for v in vs))) for eid, (ts, vs) in self._pieces.items()},
        )

    def simplify(self) -> PLFunction:
        """Drop breakpoints where the function does not bend."""
        out = {}
        for eid, (ts, vs) in self._pieces.items():
            keep_t, keep_v = [ts[0]], [vs[0]]
            for k in range(1, len(ts) - 1):
                left = (vs[k] - keep_v[-1]) / (ts[k] - keep_t[-1])
                right = (vs[k + 1] - vs[k]) / (ts[k + 1] - ts[k])
                if not close(left, right):
                    keep_t.append(ts[k])
                    keep_v.append(vs[k])
            keep_t.append(ts[-1])
            keep_v.append(vs[-1])
            out[eid] = list(zip(keep_t, keep_v))
        return PLFunction(self._graph, out)

    def sample(self, step: object) -> Iterator[tuple[str, Scalar, Scalar]]:
        """(edge id, t, value) on each edge at spacing ``step``, endpoints included."""
        step = parse_scalar(step)
        if step <= 0:
            raise ValueError(f"sampling step must be positive, got {step}")
        for eid in self._graph.edge_ids:
            ts, vs = self._pieces[eid]
            length = ts[-1]
            n = max(1, math.ceil(length / step))
            for k in range(n + 1):
                t = length * k / n if isinstance(length, Fraction) else length * (k / n)
                yield eid, t, _interpolate(ts, vs, t)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PLFunction):
            return NotImplemented
        return self._graph == other._graph and self._pieces == other._pieces

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        count = sum(len(ts) for ts, _ in self._pieces.values())
        return f"PLFunction({count} breakpoints on {self._graph!r})"


def _normalize_edge(graph: MetricGraph, eid: str, items: Sequence[tuple[object, object]]) -> Pieces:
    length = graph.edge(eid).length
    ts = [parse_scalar(t) for t, _ in items]
    vs = [parse_scalar(v) for _, v in items]
    if len(ts) < 2:
        raise ValueError(f"edge {eid!r} needs at least two breakpoints")
    if not close(ts[0], 0) or not close(ts[-1], length):
        raise ValueError(f"breakpoints on edge {eid!r} must span [0, {length}]")
    ts[0], ts[-1] = length * 0, length
    for a, b in zip(ts, ts[1:]):
        if not a < b:
            raise ValueError(f"breakpoints on edge {eid!r} not strictly increasing at {b}")
    for v in vs:
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError(f"non-finite value on edge {eid!r}")
    return tuple(ts), tuple(vs)


def _interpolate(ts: Sequence[Scalar], vs: Sequence[Scalar], t: Scalar) -> Scalar:
    if not (leq(ts[0], t) and leq(t, ts[-1])):
        raise ValueError(f"t={t} outside [{ts[0]}, {ts[-1]}]")
    k = bisect.bisect_right(ts, t) - 1
    k = min(max(k, 0), len(ts) - 2)
    t0, t1 = ts[k], ts[k + 1]
    if t == t0:
        return vs[k]
    if t == t1:
        return vs[k + 1]
    return vs[k] + (vs[k + 1] - vs[k]) * (t - t0) / (t1 - t0)


# -- Slopes --------------------------------------------------------------------


def directional_derivatives(u: PLFunction, x: GraphPoint) -> list[Scalar]:
    """One-sided derivatives of ``u`` along every direction leaving ``x``."""
    g = u.graph
    if x.is_vertex:
        out = []
        for eid, side in g.incident(x.vertex):
            slopes = u.slopes(eid)
            out.append(slopes[0] if side == 0 else -slopes[-1])
        if not out:
            raise ValueError(f"vertex {x.vertex!r} has no incident edge")
        return out
    g.check_point(x)
    ts, _ = u.edge_breakpoints(x.edge)
    slopes = u.slopes(x.edge)
    k = bisect.bisect_left(ts, x.t)
    for j in (k - 1, k):
        if 0 < j < len(ts) - 1 and close(ts[j], x.t):
            return [slopes[j], -slopes[j - 1]]
    s = slopes[min(max(k, 1), len(slopes)) - 1]
    return [s, -s]


def slopes_at(u: PLFunction, x: GraphPoint) -> SlopeTriple:
    """Local slope, subslope and superslope at ``x`` from one-sided derivatives."""
    gs = directional_derivatives(u, x)
    zero = zero_like(*gs)
    sub = max([zero] + [-d for d in gs])
    sup = max([zero] + list(gs))
    return SlopeTriple(max(sub, sup), sub, sup)


# -- Constructions -------------------------------------------------------------


def _lower_envelope(lines: Sequence[tuple[Scalar, Scalar]], lo: Scalar, hi: Scalar) -> list[tuple[Scalar, Scalar]]:
    """Breakpoints of t -> min(slope * t + offset) on [lo, hi]."""
    candidates = [lo, hi]
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            (s1, c1), (s2, c2) = lines[i], lines[j]
            if s1 != s2:
                t = (c2 - c1) / (s1 - s2)
                if lo < t < hi:
                    candidates.append(t)
    points = dedupe_sorted(candidates)
    return [(t, min(s * t + c for s, c in lines)) for t in points]


def field_from_vertex_values(g: MetricGraph, offsets: Mapping[str, Scalar], slope: Scalar) -> PLFunction:
    """x -> min over edge endpoints v of offsets[v] + slope * (distance to v along the edge).

    With offsets the distances from a source set this is the distance field;
    with McShane offsets it is the extension itself.
    """
    pieces = {}
    for edge in g.edges:
        a, b = offsets.get(edge.start, INF), offsets.get(edge.end, INF)
        lines = [(s, c) for s, c in ((slope, a), (-slope, b + slope * edge.length)) if c != INF]
        if not lines:
            raise ValueError(f"edge {edge.id!r} is unreachable")
        pieces[edge.id] = _lower_envelope(lines, edge.length * 0, edge.length)
    return PLFunction(g, pieces)


def distance_field(g: MetricGraph, source: GraphPoint) -> PLFunction:
    """x -> d(source, x)."""
    g.check_point(source)

    def build() -> PLFunction:
        to_vertex = g.distances_from(source)
        field = field_from_vertex_values(g, to_vertex, 1)
        if source.is_vertex:
            return field
        # the edge carrying the source also has the direct route |t - t_source|
        edge = g.edge(source.edge)
        a, b = to_vertex[edge.start], to_vertex[edge.end]
        tp = source.t
        left = _lower_envelope([(-1, tp), (1, a), (-1, b + edge.length)], edge.length * 0, tp)
        right = _lower_envelope([(1, -tp), (1, a), (-1, b + edge.length)], tp, edge.length)
        pieces = {eid: list(zip(*field.edge_breakpoints(eid))) for eid in g.edge_ids}
        pieces[edge.id] = left + right[1:]
        return PLFunction(g, pieces)

    if source.is_vertex or is_exact(source.t):
        return g.memo(("field", source), build)
    return build()


def constant(g: MetricGraph, value: object) -> PLFunction:
    value = parse_scalar(value)
    return PLFunction(g, {e.id: [(e.length * 0, value), (e.length, value)] for e in g.edges})


def cone_function(g: MetricGraph, apex: GraphPoint, a: object, kappa: object) -> PLFunction:
    """The cone a + kappa * d(apex, .) with kappa <= 0."""
    a, kappa = parse_scalar(a), parse_scalar(kappa)
    if kappa > 0:
        raise ValueError(f"cone slope must be nonpositive, got {kappa}")
    return distance_field(g, apex).map_values(lambda d: a + kappa * d)


def pointwise_min(us: Sequence[PLFunction]) -> PLFunction:
    """Exact pointwise minimum, crossing points included as breakpoints."""
    if not us:
        raise ValueError("pointwise_min needs at least one function")
    g = us[0].graph
    for u in us[1:]:
        if u.graph != g:
            raise ValueError("pointwise_min over functions on different graphs")
    if len(us) == 1:
        return us[0]
    pieces = {}
    for eid in g.edge_ids:
        grid = dedupe_sorted(t for u in us for t in u.edge_breakpoints(eid)[0])
        out: list[tuple[Scalar, Scalar]] = []
        for lo, hi in zip(grid, grid[1:]):
            ends = [(u.value(_at(g, eid, lo)), u.value(_at(g, eid, hi))) for u in us]
            lines = [((vb - va) / (hi - lo), va - (vb - va) / (hi - lo) * lo) for va, vb in ends]
            segment = _lower_envelope(lines, lo, hi)
            # endpoint values straight from the functions keep shared breakpoints exact
            segment[0] = (lo, min(va for va, _ in ends))
            segment[-1] = (hi, min(vb for _, vb in ends))
            out.extend(segment if not out else segment[1:])
        pieces[eid] = out
    return PLFunction(g, pieces).simplify()


def _at(g: MetricGraph, eid: str, t: Scalar) -> GraphPoint:
    edge = g.edge(eid)
    if t == 0:
        return GraphPoint.at_vertex(edge.start)
    if t == edge.length:
        return GraphPoint.at_vertex(edge.end)
    return GraphPoint(eid, t)


def negate(u: PLFunction) -> PLFunction:
    return u.map_values(lambda v: -v)


def scale(u: PLFunction, factor: object) -> PLFunction:
    factor = parse_scalar(factor)
    return u.map_values(lambda v: factor * v)


def shift(u: PLFunction, offset: object) -> PLFunction:
    offset = parse_scalar(offset)
    return u.map_values(lambda v: v + offset)


# -- Composition ---------------------------------------------------------------


class PiecewiseLinearMap:
    """Scalar PL map y -> h(y) given by breakpoints; composing with it is exact."""

    def __init__(self, points: Sequence[tuple[object, object]]) -> None:
        xs = [parse_scalar(x) for x, _ in points]
        ys = [parse_scalar(y) for _, y in points]
        if len(xs) < 2 or any(not a < b for a, b in zip(xs, xs[1:])):
            raise ValueError("map breakpoints must be at least two, strictly increasing")
        self._xs, self._ys = tuple(xs), tuple(ys)

    @property
    def breakpoints(self) -> tuple[Scalar, ...]:
        return self._xs

    @property
    def domain(self) -> tuple[Scalar, Scalar]:
        return self._xs[0], self._xs[-1]

    def __call__(self, y: Scalar) -> Scalar:
        lo, hi = self.domain
        if not (leq(lo, y) and leq(y, hi)):
            raise ValueError(f"{y} outside map domain [{lo}, {hi}]")
        return _interpolate(self._xs, self._ys, min(max(y, lo), hi))


def compose_scalar(u: PLFunction, h: Callable[[Scalar], Scalar], tol: float = COMPOSE_TOL) -> PLFunction:
    """PL approximation of h(u) within ``tol`` in sup norm; exact for a PiecewiseLinearMap."""
    for value in u.values():
        _apply(h, value)
    pieces = {}
    for eid in u.graph.edge_ids:
        out: list[tuple[Scalar, Scalar]] = []
        for t0, v0, t1, v1 in u.segments(eid):
            segment = _compose_segment(h, t0, v0, t1, v1, tol)
            out.extend(segment if not out else segment[1:])
        pieces[eid] = out
    return PLFunction(u.graph, pieces)


def _apply(h: Callable[[Scalar], Scalar], y: Scalar) -> Scalar:
    try:
        out = h(y)
    except (ValueError, ArithmeticError, TypeError) as err:
        raise ValueError(f"h undefined at {y}: {err}") from None
    if isinstance(out, complex) or (isinstance(out, float) and not math.isfinite(out)):
        raise ValueError(f"h undefined at {y}")
    return out if isinstance(out, (Fraction, int)) else float(out)


def _compose_segment(h, t0, v0, t1, v1, tol) -> list[tuple[Scalar, Scalar]]:
    if isinstance(h, PiecewiseLinearMap):
        ts = [t0, t1]
        lo, hi = min(v0, v1), max(v0, v1)
        for y in h.breakpoints:
            if lo < y < hi:
                ts.append(t0 + (y - v0) / (v1 - v0) * (t1 - t0))
        ts = dedupe_sorted(ts)
        return [(t, _apply(h, v0 + (v1 - v0) * (t - t0) / (t1 - t0))) for t in ts]

    out = [(t0, _apply(h, v0))]

    def refine(ta, ya, tb, yb, depth):
        tm = (ta + tb) / 2
        ym = _apply(h, (ya_in(ta) + ya_in(tb)) / 2)
        if depth < COMPOSE_MAX_DEPTH and abs(ym - (ya + yb) / 2) > tol / 2:
            refine(ta, ya, tm, ym, depth + 1)
            refine(tm, ym, tb, yb, depth + 1)
        else:
            out.append((tb, yb))

    def ya_in(t):
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    refine(t0, out[0][1], t1, _apply(h, v1), 0)
    return out


def lipschitz_excess(u: PLFunction, lipschitz: Scalar, pairs: Sequence[tuple[GraphPoint, GraphPoint]]) -> Scalar:
    """max(|u(x) - u(y)| - L d(x, y)) over the pairs, 0 when none violate."""
    worst = zero_like(lipschitz)
    for x, y in pairs:
        gap = abs(u(x) - u(y)) - lipschitz * point_distance(u.graph, x, y)
        if gap > tolerance(u(x), u(y)) and gap > worst:
            worst = gap
    return worst

"""
Grid metric graphs approximating planar domains.

Grid points inside the domain become vertices; stencil edges join points
up to Chebyshev radius k along primitive offsets whose segment stays in the
domain. Used for consistency experiments against the Euclidean inradius
and the cone ground state of the disk.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Protocol, Sequence

import numpy as np
from shapely.geometry import LineString, Point
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.prepared import prep

from inflap.config import SolverConfig
from inflap.const import DEFAULT_SAMPLES, DEFAULT_SEED, SolveStatus, SweepMode
from inflap.metric_graph import Edge, GraphPoint, MetricGraph, require_valid
from inflap.perron_solver import principal_eigenvalue, solve_ground_state
from inflap.report import CheckReport, Witness, verdict

_LOG = logging.getLogger(__name__)

EPS = 1e-12
NEIGHBORS_8 = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1) if (a, b) != (0, 0)]


class Domain(Protocol):
    convex: bool

    def contains(self, x: float, y: float) -> bool: ...

    def segment_inside(self, p: tuple[float, float], q: tuple[float, float]) -> bool: ...

    def bounds(self) -> tuple[float, float, float, float]: ...

    def clearance(self, x: float, y: float) -> float: ...

    def to_dict(self) -> dict[str, Any]: ...


@dataclass(frozen=True)
class Rectangle:
    xmin: float
    ymin: float
    xmax: float
    ymax: float
    convex: bool = field(default=True, init=False)

    def __post_init__(self) -> None:
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("rectangle must have positive area")

    def contains(self, x: float, y: float) -> bool:
        return self.xmin - EPS <= x <= self.xmax + EPS and self.ymin - EPS <= y <= self.ymax + EPS

    def segment_inside(self, p: tuple[float, float], q: tuple[float, float]) -> bool:
        return self.contains(*p) and self.contains(*q)

    def bounds(self) -> tuple[float, float, float, float]:
        return self.xmin, self.ymin, self.xmax, self.ymax

    def clearance(self, x: float, y: float) -> float:
        return min(x - self.xmin, self.xmax - x, y - self.ymin, self.ymax - y)

    @property
    def inradius(self) -> float:
        return min(self.xmax - self.xmin, self.ymax - self.ymin) / 2

    def to_dict(self) -> dict[str, Any]:
        return {"shape": "rectangle", "bounds": [self.xmin, self.ymin, self.xmax, self.ymax]}


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple[float, float] = (0.0, 0.0)
    convex: bool = field(default=True, init=False)

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.center[0], y - self.center[1]) <= self.radius + EPS

    def segment_inside(self, p: tuple[float, float], q: tuple[float, float]) -> bool:
        return self.contains(*p) and self.contains(*q)

    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        return cx - self.radius, cy - self.radius, cx + self.radius, cy + self.radius

    def clearance(self, x: float, y: float) -> float:
        return self.radius - math.hypot(x - self.center[0], y - self.center[1])

    @property
    def inradius(self) -> float:
        return self.radius

    def to_dict(self) -> dict[str, Any]:
        return {"shape": "disk", "radius": self.radius, "center": list(self.center)}


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with optional polygonal holes; closed set.

    Geometry queries run on shapely; the closed region is widened by ``EPS``
    so grid points computed in floating point on an edge still count as inside.
    """

    vertices: tuple[tuple[float, float], ...]
    holes: tuple[tuple[tuple[float, float], ...], ...] = ()
    convex: bool = field(default=False, init=False)
    _shape: ShapelyPolygon = field(init=False, repr=False, compare=False)
    _region: Any = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least three vertices")
        shape = ShapelyPolygon(self.vertices, self.holes)
        if not shape.area > 0:
            raise ValueError("polygon must have positive area")
        if not shape.is_valid:
            raise ValueError("polygon rings must not self-intersect")
        object.__setattr__(self, "_shape", shape)
        object.__setattr__(self, "_region", prep(shape.buffer(EPS)))

    def contains(self, x: float, y: float) -> bool:
        return self._region.covers(Point(x, y))

    def segment_inside(self, p: tuple[float, float], q: tuple[float, float]) -> bool:
        if p == q:
            return self.contains(*p)
        return self._region.covers(LineString([p, q]))

    def bounds(self) -> tuple[float, float, float, float]:
        return self._shape.bounds

    def clearance(self, x: float, y: float) -> float:
        point = Point(x, y)
        if not self._region.covers(point):
            return 0.0
        return self._shape.boundary.distance(point)

    def to_dict(self) -> dict[str, Any]:
        return {
            "shape": "polygon",
            "vertices": [list(v) for v in self.vertices],
            "holes": [[list(v) for v in hole] for hole in self.holes],
        }


def _pairs(raw: Sequence[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    return tuple((float(x), float(y)) for x, y in raw)


def parse_domain(raw: Mapping[str, Any]) -> Domain:
    """Domain from its JSON form: disk, polygon (with holes) or rectangle."""
    shape = raw.get("shape")
    try:
        if shape == "disk":
            return Disk(float(raw["radius"]), _pairs([raw.get("center", (0.0, 0.0))])[0])
        if shape == "polygon":
            return Polygon(_pairs(raw["vertices"]), tuple(_pairs(hole) for hole in raw.get("holes", ())))
        if shape == "rectangle":
            return Rectangle(*(float(v) for v in raw["bounds"]))
    except (KeyError, TypeError) as err:
        raise ValueError(f"malformed {shape} domain: {err}") from None
    raise ValueError(f"unknown domain shape {shape!r}")


# -- Construction --------------------------------------------------------------


def stencil_offsets(k: int) -> list[tuple[int, int]]:
    """Primitive offsets with Chebyshev norm <= k, one per +-pair."""
    if k < 1:
        raise ValueError(f"stencil radius must be at least 1, got {k}")
    out = []
    for a in range(0, k + 1):
        for b in range(-k, k + 1):
            if (a, b) == (0, 0) or (a == 0 and b < 0):
                continue
            if math.gcd(a, abs(b)) == 1:
                out.append((a, b))
    return out


def stencil_distortion(k: int) -> float:
    """Worst ratio of stencil path length to Euclidean length: sec of half the largest angular gap."""
    angles = sorted(math.atan2(b, a) % math.pi for a, b in stencil_offsets(k))
    gaps = [b - a for a, b in zip(angles, angles[1:])] + [angles[0] + math.pi - angles[-1]]
    return 1.0 / math.cos(max(gaps) / 2)


def _vertex_id(i: int, j: int) -> str:
    return f"x{i}y{j}"


def build_grid_graph(domain: Domain, h: float, k: int = 1) -> MetricGraph:
    """Grid graph of ``domain`` at spacing ``h`` with stencil radius ``k``.

    A node is boundary when one of its eight neighbours, or the segment to it,
    leaves the domain. Edges between two boundary nodes are not built and
    boundary nodes left without edges are dropped.
    """
    h = float(h)
    if not h > 0:
        raise ValueError(f"spacing must be positive, got {h}")
    xmin, ymin, xmax, ymax = domain.bounds()
    inside: dict[tuple[int, int], tuple[float, float]] = {}
    for i in range(math.ceil(xmin / h - EPS), math.floor(xmax / h + EPS) + 1):
        for j in range(math.ceil(ymin / h - EPS), math.floor(ymax / h + EPS) + 1):
            if domain.contains(i * h, j * h):
                inside[(i, j)] = (i * h, j * h)

    boundary = set()
    for (i, j), pos in inside.items():
        for a, b in NEIGHBORS_8:
            other = inside.get((i + a, j + b))
            if other is None or not domain.segment_inside(pos, other):
                boundary.add((i, j))
                break
    if len(boundary) == len(inside):
        raise ValueError("grid has no interior nodes; refine h or enlarge the domain")

    offsets = stencil_offsets(k)
    edges: list[Edge] = []
    used: set[tuple[int, int]] = set()
    for (i, j) in sorted(inside):
        pos = inside[(i, j)]
        for a, b in offsets:
            target = (i + a, j + b)
            other = inside.get(target)
            if other is None or ((i, j) in boundary and target in boundary):
                continue
            if not domain.segment_inside(pos, other):
                continue
            edges.append(Edge(f"g{len(edges):06d}", _vertex_id(i, j), _vertex_id(*target), h * math.hypot(a, b)))
            used.update(((i, j), target))

    keep = sorted(key for key in inside if key in used)
    vertices = [_vertex_id(*key) for key in keep]
    g = MetricGraph(
        vertices,
        edges,
        [_vertex_id(*key) for key in keep if key in boundary],
        positions={_vertex_id(*key): inside[key] for key in keep},
    )
    require_valid(g)
    _LOG.info("Grid graph: %d vertices (%d boundary), %d edges", len(vertices), len(g.boundary), len(edges))
    return g


def point_position(g: MetricGraph, point: GraphPoint) -> tuple[float, float]:
    """Planar position of a graph point, interpolated along its straight edge."""
    positions = g.positions
    if point.is_vertex:
        return positions[point.vertex]
    edge = g.edge(point.edge)
    (x0, y0), (x1, y1) = positions[edge.start], positions[edge.end]
    s = float(point.t) / float(edge.length)
    return x0 + s * (x1 - x0), y0 + s * (y1 - y0)


# -- Experiments ---------------------------------------------------------------


def grid_distortion_check(
    g: MetricGraph,
    domain: Domain,
    k: int,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Grid distance between sampled nodes lies between the Euclidean distance and the stencil distortion times it.

    The upper bound is only claimed on convex domains for pairs whose
    straight stencil path keeps clear of the boundary.
    """
    rng = np.random.default_rng(seed)
    positions = g.positions
    names = sorted(positions)
    factor = stencil_distortion(k)
    spacing = min(float(e.length) for e in g.edges)
    angles = sorted(math.atan2(b, a) % math.pi for a, b in stencil_offsets(k))
    widest = max([b - a for a, b in zip(angles, angles[1:])] + [angles[0] + math.pi - angles[-1]])
    witnesses = []
    upper_checked = 0
    for _ in range(samples):
        p, q = (names[int(i)] for i in rng.integers(0, len(names), size=2))
        if p == q:
            continue
        grid = float(g.vertex_distances(p).get(q, math.inf))
        euclid = math.dist(positions[p], positions[q])
        if grid < euclid - 1e-9:
            witnesses.append(Witness(GraphPoint.at_vertex(q), euclid - grid, f"grid distance from {p} below Euclidean"))
        if not domain.convex:
            continue
        margin = euclid * math.sin(widest) + 2 * k * spacing
        if min(domain.clearance(*positions[p]), domain.clearance(*positions[q])) < margin:
            continue
        upper_checked += 1
        if grid > factor * euclid + 1e-9:
            witnesses.append(
                Witness(GraphPoint.at_vertex(q), grid - factor * euclid, f"grid distance from {p} above bound")
            )
    return verdict("grid_distortion", witnesses, distortion=factor, upper_checked=upper_checked)


@dataclass(frozen=True)
class ConsistencyReport:
    """Disk experiment: grid eigenvalue and ground state against the Euclidean cone."""

    radius: float
    h: float
    k: int
    lambda_grid: float
    lambda_error: float
    cone_error: float
    status: SolveStatus
    vertices: int
    edges: int
    distortion: float

    def passed(self, tol: float = 0.05) -> bool:
        return (
            self.status is SolveStatus.CONVERGED
            and self.lambda_error <= tol / self.radius
            and self.cone_error <= tol
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "radius": self.radius,
            "h": self.h,
            "k": self.k,
            "lambda_grid": self.lambda_grid,
            "lambda_error": self.lambda_error,
            "cone_error": self.cone_error,
            "status": str(self.status),
            "vertices": self.vertices,
            "edges": self.edges,
            "distortion": self.distortion,
            "passed": self.passed(),
        }


def ball_consistency(
    radius: float = 1.0,
    h: float = 1 / 50,
    k: int = 3,
    config: SolverConfig | None = None,
) -> ConsistencyReport:
    """Solve on the grid disk and compare with Lambda = 1/R and the cone 1 - |x|/R."""
    disk = Disk(float(radius))
    g = build_grid_graph(disk, h, k)
    lam, _ = principal_eigenvalue(g)
    longest = max(float(e.length) for e in g.edges)
    base = config or SolverConfig(mode=SweepMode.JACOBI, tol=1e-10)
    solver = replace(base, h=longest, mode=SweepMode.JACOBI)
    result = solve_ground_state(g, lam, "all", solver)
    cone_error = 0.0
    for point, value in zip(result.u.disc.nodes, result.u.values):
        x, y = point_position(g, point)
        cone = 1.0 - math.hypot(x, y) / disk.radius
        cone_error = max(cone_error, abs(float(value) - cone))
    report = ConsistencyReport(
        radius=disk.radius,
        h=float(h),
        k=k,
        lambda_grid=float(lam),
        lambda_error=abs(float(lam) - 1.0 / disk.radius),
        cone_error=cone_error,
        status=result.status,
        vertices=len(g.vertices),
        edges=len(g.edges),
        distortion=stencil_distortion(k),
    )
    _LOG.info("Disk consistency: lambda %.6f, cone error %.4f", report.lambda_grid, report.cone_error)
    return report

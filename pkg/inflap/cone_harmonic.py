"""
Infinity-superharmonicity of piecewise-linear functions on metric graphs.

Comparison with cones from below is certified exactly by a local test
(concave along edges, max + min of the outgoing derivatives <= 0 at interior
vertices) and cross-checked by randomized cone comparisons. Harnack,
Lipschitz, slope regularity and composition checks build on it.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable

import numpy as np

from inflap.const import (
    COMPOSE_TOL,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    HARNACK_CONSTANT,
    SAMPLED_CHECK_TOL,
    CheckStatus,
)
from inflap.eikonal import mcshane_extension, random_boundary_data
from inflap.metric_graph import (
    GraphPoint,
    MetricGraph,
    Subdomain,
    ball,
    boundary_distance_field,
    point_distance,
    random_point,
)
from inflap.numeric import Scalar, parse_scalar, tolerance
from inflap.pl_calculus import (
    PLFunction,
    compose_scalar,
    cone_function,
    constant,
    directional_derivatives,
    distance_field,
    negate,
    pointwise_min,
    slopes_at,
)
from inflap.report import CheckReport, Witness, inapplicable, verdict

_LOG = logging.getLogger(__name__)

SAMPLES_PER_TRIAL = 20
GRID_POINTS = 65


def _gap(a: Scalar, b: Scalar, tol: float | None) -> Scalar:
    """How far ``a`` exceeds ``b`` beyond the comparison slack; <= 0 when it does not."""
    slack = tolerance(a, b) if tol is None else tol
    return a - b - slack


def is_inf_superharmonic_exact(u: PLFunction, tol: float | None = None) -> CheckReport:
    """Local test for comparison with cones from below on the domain.

    ``tol`` overrides the slope comparison slack (exact data compares exactly).
    """
    g = u.graph
    witnesses = []
    for eid in g.edge_ids:
        ts, _ = u.edge_breakpoints(eid)
        slopes = u.slopes(eid)
        for k in range(1, len(ts) - 1):
            left, right = slopes[k - 1], slopes[k]
            if _gap(right, left, tol) > 0:
                witnesses.append(Witness(GraphPoint(eid, ts[k]), right - left, "convex kink"))
    for v in g.interior_vertices:
        if not g.degree(v):
            continue
        gs = directional_derivatives(u, GraphPoint.at_vertex(v))
        spread = max(gs) + min(gs)
        if _gap(spread, 0 * spread, tol) > 0:
            witnesses.append(Witness(GraphPoint.at_vertex(v), spread, "max + min of outgoing derivatives > 0"))
    return verdict("inf_superharmonic", witnesses)


def is_inf_subharmonic_exact(u: PLFunction, tol: float | None = None) -> CheckReport:
    report = is_inf_superharmonic_exact(negate(u), tol)
    return verdict("inf_subharmonic", list(report.witnesses))


# -- Randomized cone comparison ------------------------------------------------


def _random_subdomain(u: PLFunction, rng: np.random.Generator) -> Subdomain | None:
    g = u.graph
    dist = boundary_distance_field(g)
    if rng.uniform() < 0.5:
        kinks = [p for p in u.breakpoints() if not g.is_boundary(p)]
        center = kinks[int(rng.integers(0, len(kinks)))] if kinks else random_point(g, rng)
    else:
        center = random_point(g, rng)
    if rng.uniform() < 0.5:
        reach = float(dist(center))
        if reach <= 0:
            return None
        return ball(g, center, reach * rng.uniform(0.05, 0.95))
    edge = g.edges[int(rng.integers(0, len(g.edges)))]
    lo, hi = sorted(rng.uniform(0.0, float(edge.length), size=2))
    if not 0 < lo < hi < float(edge.length):
        return None
    return Subdomain.edge_interval(g, edge.id, lo, hi)


def cone_comparison_sampled(
    u: PLFunction,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Search for a cone a + kappa d(apex, .) below u on the boundary of some O but above u inside.

    Independent of the local test: it only evaluates u and distances.
    """
    g = u.graph
    rng = np.random.default_rng(seed)
    steep = 2 * float(u.max_slope()) + 1
    tried = 0
    for trial in range(trials):
        region = _random_subdomain(u, rng)
        if region is None or region.is_empty or not region.compactly_contained():
            continue
        cut = region.boundary_points()
        apex = None
        for _ in range(20):
            candidate = random_point(g, rng)
            if not region.contains(candidate):
                apex = candidate
                break
        if apex is None or not cut:
            continue
        tried += 1
        kappa = 0.0 if rng.uniform() < 0.2 else -rng.uniform(0.0, steep)
        to_apex = distance_field(g, apex)
        a = min(float(u(z)) - kappa * float(to_apex(z)) for z in cut)
        candidates = [p for p in u.breakpoints() if region.contains(p)]
        candidates += [GraphPoint.at_vertex(v) for v in sorted(region.vertices)]
        candidates += region.sample(rng, SAMPLES_PER_TRIAL)
        for p in candidates:
            excess = a + kappa * float(to_apex(p)) - float(u(p))
            if excess > SAMPLED_CHECK_TOL * max(1.0, abs(a)):
                _LOG.debug("Cone comparison failed in trial %d at %s", trial, p)
                return verdict(
                    "cone_comparison",
                    [Witness(p, excess, f"cone apex {apex}, a={a:.6g}, kappa={kappa:.6g}")],
                    trials=tried,
                )
    return verdict("cone_comparison", [], trials=tried)


# -- Harnack -------------------------------------------------------------------


def _closure_points(u: PLFunction, region: Subdomain) -> list[GraphPoint]:
    """Points where a PL function attains its extremes over the closure of ``region``."""
    points = [GraphPoint.at_vertex(v) for v in sorted(region.vertices)]
    for eid, spans in region.intervals.items():
        ts, _ = u.edge_breakpoints(eid)
        for lo, hi in spans:
            points.append(region.graph.point(eid, lo))
            points.append(region.graph.point(eid, hi))
            points.extend(GraphPoint(eid, t) for t in ts if lo < t < hi)
    return points


def harnack_check(
    u: PLFunction,
    x0: GraphPoint,
    big_r: object,
    r: object,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """u(y) <= 3 u(x) for x, y in the ball of radius r when 4r < R and u >= 0 on B_R(x0) inside the domain."""
    g = u.graph
    big_r, r = parse_scalar(big_r), parse_scalar(r)
    name = "harnack"
    if r <= 0 or 4 * r >= big_r:
        return inapplicable(name, f"need 0 < 4r < R, got r={r}, R={big_r}")
    if boundary_distance_field(g)(x0) < big_r:
        return inapplicable(name, "ball of radius R leaves the domain")
    outer = ball(g, x0, big_r)
    if min(u(p) for p in _closure_points(u, outer)) < 0:
        return inapplicable(name, "u is negative on the ball of radius R")

    inner = ball(g, x0, r)
    candidates = _closure_points(u, inner)
    lowest = min(candidates, key=u)
    highest = max(candidates, key=u)
    low, high = u(lowest), u(highest)

    rng = np.random.default_rng(seed)
    pairs = inner.sample(rng, 2 * samples)
    sampled_ratio = max((_ratio(u(y), u(x)) for x, y in zip(pairs[::2], pairs[1::2])), default=1.0)
    ratio = _ratio(high, low)
    witnesses = []
    if high > HARNACK_CONSTANT * low + tolerance(high, low):
        witnesses.append(Witness(highest, high - HARNACK_CONSTANT * low, f"u = {float(high):.6g} at max"))
        witnesses.append(Witness(lowest, None, f"u = {float(low):.6g} at min"))
    return verdict(
        name,
        witnesses,
        empirical_max_ratio=ratio,
        sampled_max_ratio=sampled_ratio,
        constant=HARNACK_CONSTANT,
    )


def _ratio(high: Scalar, low: Scalar) -> float:
    if low > 0:
        return float(high) / float(low)
    return 1.0 if high <= 0 else math.inf


# -- Regularity ----------------------------------------------------------------


def regularity_checks(
    u: PLFunction,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Local Lipschitz bound, slope = subslope, and subslope domination next to breakpoints."""
    g = u.graph
    name = "regularity"
    exact = is_inf_superharmonic_exact(u)
    if not exact.passed:
        return inapplicable(name, "u is not infinity-superharmonic", precondition=exact)
    rng = np.random.default_rng(seed)
    dist = boundary_distance_field(g)
    floor = u.min_value()
    lipschitz, slope_gap, adjacent = [], [], []

    for _ in range(samples):
        x = random_point(g, rng)
        reach = float(dist(x))
        r = reach * rng.uniform(0.1, 0.49)
        if r <= 0:
            continue
        for y in ball(g, x, r).sample(rng, 1):
            ux, uy = float(u(x)), float(u(y))
            bound = (max(ux, uy) - float(floor)) / r * float(point_distance(g, x, y))
            if abs(ux - uy) > bound + SAMPLED_CHECK_TOL * max(1.0, abs(ux)):
                lipschitz.append(Witness(y, abs(ux - uy) - bound, f"paired with {x}, r={r:.6g}"))

    points = [p for p in u.breakpoints() if not g.is_boundary(p)]
    points += [random_point(g, rng) for _ in range(samples)]
    for p in points:
        triple = slopes_at(u, p)
        if triple.superslope > triple.subslope + tolerance(triple.superslope, triple.subslope):
            slope_gap.append(Witness(p, triple.superslope - triple.subslope, "slope exceeds subslope"))

    for p in u.breakpoints():
        if g.is_boundary(p):
            continue
        sub = slopes_at(u, p).subslope
        for s in directional_derivatives(u, p):
            if abs(s) > sub + tolerance(s, sub):
                adjacent.append(Witness(p, abs(s) - sub, "adjacent segment steeper than subslope"))

    witnesses = lipschitz + slope_gap + adjacent
    return verdict(
        name,
        witnesses,
        lipschitz_violations=len(lipschitz),
        slope_violations=len(slope_gap),
        adjacent_violations=len(adjacent),
        checked_points=len(points),
    )


# -- Composition ---------------------------------------------------------------


def _derivatives(
    h: Callable[[Scalar], Scalar],
    lo: float,
    hi: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid over [lo, hi] with one-sided/central first and three-point second differences."""
    if hi <= lo:
        hi = lo + 1e-3 * max(1.0, abs(lo))
    grid = np.linspace(lo, hi, GRID_POINTS)
    step = grid[1] - grid[0]
    values = np.array([float(h(float(y))) for y in grid])
    first = np.gradient(values, step, edge_order=2)
    second = np.empty_like(values)
    second[1:-1] = (values[2:] - 2 * values[1:-1] + values[:-2]) / step**2
    second[0], second[-1] = second[1], second[-2]
    return grid, first, second


def composition_check(
    v: PLFunction,
    h: Callable[[Scalar], Scalar],
    dh: Callable[[float], float] | None = None,
    d2h: Callable[[float], float] | None = None,
    tol: float = COMPOSE_TOL,
    force: bool = False,
) -> CheckReport:
    """h(v) stays infinity-superharmonic when v > 0 is, h' > 0 and h'' < 0 on the range of v.

    An affine h is run and flagged. An h violating the derivative conditions
    is inapplicable unless ``force`` runs it anyway as a negative control.
    """
    g = v.graph
    name = "composition"
    interior = [p for p in v.breakpoints() if not g.is_boundary(p)]
    if v.min_value() < 0 or any(v(p) <= 0 for p in interior):
        return inapplicable(name, "v is not positive in the domain")
    base = is_inf_superharmonic_exact(v)
    if not base.passed:
        return inapplicable(name, "v is not infinity-superharmonic", precondition=base)

    lo, hi = float(v.min_value()), float(v.max_value())
    grid, first, second = _derivatives(h, lo, hi)
    if dh is not None:
        first = np.array([dh(float(y)) for y in grid])
    if d2h is not None:
        second = np.array([d2h(float(y)) for y in grid])
    flat = float(np.max(np.abs(second))) <= 1e-8 * max(1.0, float(np.max(np.abs(first))))
    increasing = bool(np.all(first > 0))
    concave = flat or bool(np.all(second < 0))
    details = {"affine": flat, "increasing": increasing, "concave": concave, "range": [lo, hi]}
    if not (increasing and concave) and not force:
        return inapplicable(name, "h needs h' > 0 and h'' < 0 on the range of v", **details)
    if flat:
        _LOG.info("Composition with an affine map: h'' = 0 on [%s, %s]", lo, hi)

    composed = compose_scalar(v, h, tol)
    report = is_inf_superharmonic_exact(composed, tol=SAMPLED_CHECK_TOL)
    return CheckReport(name, report.status, report.witnesses, details)


# -- Random instances ----------------------------------------------------------


def random_superharmonic(
    g: MetricGraph,
    rng: np.random.Generator,
    k: int = 3,
    nonnegative: bool = True,
) -> PLFunction:
    """Minimum of ``k`` infinity-superharmonic pieces with rational data.

    Pieces are McShane extensions, constants and, on trees whose leaves are all
    boundary, downward cones with an interior apex.
    """
    cones_ok = g.is_tree() and g.leaves_are_boundary()
    total = g.total_length()
    parts = []
    for _ in range(max(1, k)):
        kind = int(rng.integers(0, 3 if cones_ok else 2))
        if kind == 0:
            data = random_boundary_data(g, rng)
            if not nonnegative:
                data = type(data)({y: value - 1 for y, value in data.values.items()})
            parts.append(mcshane_extension(g, data, Fraction(int(rng.integers(1, 9)), 4)))
        elif kind == 1:
            c = Fraction(int(rng.integers(0, 17)), 4)
            parts.append(constant(g, c if nonnegative else c - 2))
        else:
            kappa = -Fraction(int(rng.integers(1, 5)), 4)
            apex = random_point(g, rng, exact=True)
            a = -kappa * total + Fraction(int(rng.integers(0, 9)), 4)
            parts.append(cone_function(g, apex, a, kappa))
    return pointwise_min(parts)


def status_of(reports: list[CheckReport]) -> CheckStatus:
    """Worst status of a batch: FAIL over INAPPLICABLE over PASS."""
    statuses = {r.status for r in reports}
    if CheckStatus.FAIL in statuses:
        return CheckStatus.FAIL
    if CheckStatus.INAPPLICABLE in statuses:
        return CheckStatus.INAPPLICABLE
    return CheckStatus.PASS

"""
Monge solutions of the eikonal equation |grad u| = lambda.

McShane extensions of boundary data, the dynamic programming identity,
classification by subslope and a harness for the comparison principle.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from inflap.const import DEFAULT_SAMPLES, DEFAULT_SEED, SAMPLED_CHECK_TOL, MongeClass
from inflap.metric_graph import GraphPoint, MetricGraph, Subdomain, point_distance, random_point, require_valid
from inflap.numeric import Scalar, format_scalar, is_exact, leq, parse_scalar, tolerance
from inflap.pl_calculus import PLFunction, field_from_vertex_values, pointwise_min, shift, slopes_at
from inflap.report import CheckReport, Witness, inapplicable, verdict

_LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet values g(y) on the boundary vertices."""

    values: Mapping[str, Scalar]

    @classmethod
    def constant(cls, g: MetricGraph, value: object = 0) -> BoundaryData:
        value = parse_scalar(value)
        return cls({v: value for v in sorted(g.boundary)})

    @classmethod
    def parse(cls, raw: Mapping[str, object]) -> BoundaryData:
        return cls({str(k): parse_scalar(v) for k, v in raw.items()})

    def require_complete(self, g: MetricGraph) -> None:
        missing = sorted(g.boundary - set(self.values))
        if missing:
            raise ValueError(f"missing boundary values for {missing}")

    def to_dict(self) -> dict[str, Any]:
        return {"g": {k: format_scalar(v) for k, v in sorted(self.values.items())}}


def mcshane_extension(g: MetricGraph, data: BoundaryData, lam: object) -> PLFunction:
    """u(x) = min over boundary y of g(y) + lam * d(x, y)."""
    lam = parse_scalar(lam)
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    require_valid(g)
    data.require_complete(g)
    offsets: dict[str, Scalar] = {}
    for y in sorted(g.boundary):
        for v, d in g.vertex_distances(y).items():
            candidate = data.values[y] + lam * d
            if v not in offsets or candidate < offsets[v]:
                offsets[v] = candidate
    return field_from_vertex_values(g, offsets, lam)


def boundary_attainment(u: PLFunction, data: BoundaryData) -> dict[str, bool]:
    """Per boundary vertex: does the extension take the prescribed value there?

    The extension never exceeds g; it falls strictly below wherever g is not
    lambda-Lipschitz relative to the other boundary values.
    """
    out = {}
    for y in sorted(u.graph.boundary):
        value, target = u.vertex_value(y), data.values[y]
        out[y] = leq(target, value)
    return out


def dpp_check(
    u: PLFunction,
    lam: object,
    subdomain: Subdomain,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Dynamic programming identity u(x) = min over z in closure(O) of u(z) + lam d(x, z).

    Checked as two halves at sampled x in O: equality with the minimum over the
    cut points of O, and u(x) <= u(z) + lam d(x, z) for sampled z in O.
    """
    lam = parse_scalar(lam)
    g = u.graph
    if subdomain.graph != g:
        raise ValueError("subdomain lives on a different graph")
    if not subdomain.compactly_contained():
        raise ValueError("subdomain is not compactly contained in the domain")
    cut = subdomain.boundary_points()
    if not cut:
        raise ValueError("subdomain has no boundary points")
    rng = np.random.default_rng(seed)
    xs = list(cut) + subdomain.sample(rng, samples)
    zs = list(cut) + subdomain.sample(rng, samples)

    witnesses = []
    worst: Scalar = 0
    for x in xs:
        ux = u(x)
        best = min(u(z) + lam * point_distance(g, x, z) for z in cut)
        defect = abs(ux - best)
        for z in zs:
            defect = max(defect, ux - u(z) - lam * point_distance(g, x, z))
        worst = max(worst, defect)
        if defect > _slack(ux):
            witnesses.append(Witness(x, defect))
    _LOG.debug("DPP check at %d points, worst defect %s", len(xs), worst)
    return verdict("dpp", witnesses, max_defect=worst, points=len(xs))


def _slack(*values: Scalar) -> float:
    return 0 if is_exact(*values) else SAMPLED_CHECK_TOL * max([1.0] + [abs(float(v)) for v in values])


# -- Classification ------------------------------------------------------------


@dataclass(frozen=True)
class MongeReport:
    """Outcome of comparing the subslope of u with lambda on the domain."""

    classification: MongeClass
    below: tuple[Witness, ...] = ()
    above: tuple[Witness, ...] = ()
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def is_subsolution(self) -> bool:
        return self.classification in (MongeClass.SUBSOLUTION, MongeClass.SOLUTION)

    @property
    def is_supersolution(self) -> bool:
        return self.classification in (MongeClass.SUPERSOLUTION, MongeClass.SOLUTION)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": "monge",
            "classification": str(self.classification),
            "subslope_below_lambda": [w.to_dict() for w in self.below],
            "subslope_above_lambda": [w.to_dict() for w in self.above],
            **{k: format_scalar(v) if isinstance(v, (Fraction, float)) else v for k, v in self.details.items()},
        }


def monge_points(u: PLFunction) -> list[GraphPoint]:
    """Points of the domain where the subslope of a PL function can change.

    Breakpoints off the boundary plus one point inside every segment; the
    subslope is constant on segment interiors.
    """
    g = u.graph
    points = [p for p in u.breakpoints() if not g.is_boundary(p)]
    for eid in g.edge_ids:
        for t0, _, t1, _ in u.segments(eid):
            points.append(GraphPoint(eid, (t0 + t1) / 2))
    return points


def monge_classify(u: PLFunction, lam: object) -> MongeReport:
    """Classify u as a Monge sub-, super- or solution of |grad u| = lam."""
    lam = parse_scalar(lam)
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    below, above = [], []
    lowest = highest = None
    for p in monge_points(u):
        sub = slopes_at(u, p).subslope
        lowest = sub if lowest is None else min(lowest, sub)
        highest = sub if highest is None else max(highest, sub)
        slack = tolerance(sub, lam)
        if sub < lam - slack:
            below.append(Witness(p, lam - sub))
        elif sub > lam + slack:
            above.append(Witness(p, sub - lam))
    if not below and not above:
        kind = MongeClass.SOLUTION
    elif not below:
        kind = MongeClass.SUPERSOLUTION
    elif not above:
        kind = MongeClass.SUBSOLUTION
    else:
        kind = MongeClass.NEITHER
    return MongeReport(kind, tuple(below), tuple(above), {"min_subslope": lowest, "max_subslope": highest})


def comparison_harness(
    u: PLFunction,
    v: PLFunction,
    lam: object,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """u <= v on the closure of the domain for a Monge subsolution u and supersolution v ordered on the boundary."""
    g = u.graph
    if v.graph != g:
        raise ValueError("functions live on different graphs")
    name = "comparison"
    cu, cv = monge_classify(u, lam), monge_classify(v, lam)
    if not cu.is_subsolution:
        return inapplicable(name, f"u is not a Monge subsolution ({cu.classification})")
    if not cv.is_supersolution:
        return inapplicable(name, f"v is not a Monge supersolution ({cv.classification})")
    for y in sorted(g.boundary):
        if not leq(u.vertex_value(y), v.vertex_value(y)):
            return inapplicable(name, f"u > v at boundary vertex {y}")

    # u - v is linear between the union of both breakpoint sets
    points = set(u.breakpoints()) | set(v.breakpoints())
    rng = np.random.default_rng(seed)
    points.update(random_point(g, rng) for _ in range(samples))
    witnesses = []
    for p in sorted(points, key=GraphPoint.sort_key):
        a, b = u(p), v(p)
        if a - b > _slack(a, b):
            witnesses.append(Witness(p, a - b))
    return verdict(name, witnesses, points=len(points))


def random_boundary_data(g: MetricGraph, rng: np.random.Generator, high: int = 8) -> BoundaryData:
    """Rational boundary values k/4 with 0 <= k <= high."""
    return BoundaryData({y: Fraction(int(rng.integers(0, high + 1)), 4) for y in sorted(g.boundary)})


def random_ordered_pair(g: MetricGraph, lam: object, rng: np.random.Generator) -> tuple[PLFunction, PLFunction]:
    """A Monge subsolution u and supersolution v of |grad u| = lam with u <= v on the boundary.

    v is a minimum of McShane extensions with slopes at least lam; u is one
    extension with slope at most lam, shifted down until it sits below v on
    the boundary.
    """
    lam = parse_scalar(lam)
    parts = []
    for _ in range(int(rng.integers(1, 4))):
        slope = lam * Fraction(int(rng.integers(4, 9)), 4)
        parts.append(mcshane_extension(g, random_boundary_data(g, rng), slope))
    v = pointwise_min(parts)
    mu = lam * Fraction(int(rng.integers(2, 5)), 4)
    u = mcshane_extension(g, random_boundary_data(g, rng), mu)
    excess = max(u.vertex_value(y) - v.vertex_value(y) for y in g.boundary)
    if excess > 0:
        u = shift(u, -excess)
    return u, v

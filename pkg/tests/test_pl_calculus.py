import math
from fractions import Fraction

import pytest

from inflap.metric_graph import GraphPoint, MetricGraph, point_distance, random_graph, random_point
from inflap.pl_calculus import (
    PiecewiseLinearMap,
    PLFunction,
    compose_scalar,
    cone_function,
    constant,
    directional_derivatives,
    distance_field,
    lipschitz_excess,
    negate,
    pointwise_min,
    scale,
    shift,
    slopes_at,
)

Q = Fraction


def _identity(g: MetricGraph) -> PLFunction:
    length = g.edge("e").length
    return PLFunction(g, {"e": [(0, 0), (length, length)]})


class TestConstruction:
    def test_discontinuous_at_a_vertex(self, star3):
        pieces = {f"e{i}": [(0, 1), (1, 0)] for i in range(3)}
        pieces["e2"] = [(0, 2), (1, 0)]
        with pytest.raises(ValueError, match="discontinuity"):
            PLFunction(star3, pieces)

    def test_missing_and_unknown_edges(self, unit_interval):
        with pytest.raises(ValueError):
            PLFunction(unit_interval, {})
        with pytest.raises(ValueError):
            PLFunction(unit_interval, {"e": [(0, 0), (1, 1)], "f": [(0, 0), (1, 1)]})

    def test_breakpoints_must_increase(self, unit_interval):
        with pytest.raises(ValueError):
            PLFunction(unit_interval, {"e": [(0, 0), (Q(1, 2), 1), (Q(1, 2), 1), (1, 0)]})

    def test_rational_values_parse_exactly(self, unit_interval):
        u = PLFunction(unit_interval, {"e": [("0", "1/3"), ("1", "2/3")]})
        assert u.exact
        assert u(unit_interval.point("e", Q(1, 2))) == Q(1, 2)


class TestEvaluation:
    def test_ground_state_values(self, dumbbell, ground_state):
        assert ground_state(dumbbell.resolve("O")) == Q(1, 4)
        assert ground_state(dumbbell.point("e0", Q(1, 2))) == Q(1, 8)
        assert ground_state(dumbbell.resolve("P+")) == 1
        assert ground_state(dumbbell.point("e-3", 2)) == Q(1, 2)

    def test_slopes_at_the_peak(self, dumbbell, ground_state):
        triple = slopes_at(ground_state, dumbbell.resolve("P+"))
        assert triple.subslope == Q(1, 2)
        assert triple.superslope == 0
        assert triple.slope == Q(1, 2)

    def test_derivatives_at_a_vertex(self, dumbbell, ground_state):
        assert sorted(directional_derivatives(ground_state, dumbbell.resolve("V+1"))) == [
            Q(-1, 2),
            Q(-1, 4),
            Q(1, 2),
        ]

    def test_sample_includes_endpoints(self, unit_interval):
        rows = list(_identity(unit_interval).sample(Q(1, 4)))
        assert [t for _, t, _ in rows] == [0, Q(1, 4), Q(1, 2), Q(3, 4), 1]
        assert all(t == v for _, t, v in rows)


class TestConstructions:
    def test_distance_field_from_an_edge_point(self):
        g = MetricGraph.interval(2)
        field = distance_field(g, g.point("e", Q(1, 2)))
        assert field(g.resolve("a")) == Q(1, 2)
        assert field(g.resolve("b")) == Q(3, 2)
        assert field(g.point("e", Q(1, 2))) == 0

    def test_distance_field_matches_point_distance(self, rng):
        for _ in range(20):
            g = random_graph(rng)
            p = random_point(g, rng, exact=True)
            field = distance_field(g, p)
            for _ in range(5):
                q = random_point(g, rng, exact=True)
                assert field(q) == point_distance(g, p, q)

    def test_pointwise_min_inserts_the_crossing(self, unit_interval):
        up = _identity(unit_interval)
        down = PLFunction(unit_interval, {"e": [(0, 1), (1, 0)]})
        low = pointwise_min([up, down])
        ts, vs = low.edge_breakpoints("e")
        assert ts == (0, Q(1, 2), 1)
        assert vs == (0, Q(1, 2), 0)

    def test_pointwise_min_of_one(self, unit_interval):
        u = _identity(unit_interval)
        assert pointwise_min([u]) is u
        with pytest.raises(ValueError):
            pointwise_min([])

    def test_cone_needs_nonpositive_slope(self, unit_interval):
        apex = unit_interval.point("e", Q(1, 2))
        with pytest.raises(ValueError):
            cone_function(unit_interval, apex, 1, Q(1, 2))
        cone = cone_function(unit_interval, apex, 1, -2)
        assert cone(unit_interval.resolve("a")) == 0
        assert cone(apex) == 1

    def test_affine_value_maps(self, unit_interval):
        u = _identity(unit_interval)
        x = unit_interval.point("e", Q(1, 4))
        assert negate(u)(x) == Q(-1, 4)
        assert scale(u, 4)(x) == 1
        assert shift(u, "1/2")(x) == Q(3, 4)
        assert constant(unit_interval, 3)(x) == 3

    def test_simplify_drops_straight_breakpoints(self, unit_interval):
        u = PLFunction(unit_interval, {"e": [(0, 0), (Q(1, 3), Q(1, 3)), (1, 1)]})
        assert u.simplify().edge_breakpoints("e") == ((0, 1), (0, 1))


class TestComposition:
    def test_piecewise_linear_map_is_exact(self):
        g = MetricGraph.interval(2)
        h = PiecewiseLinearMap([(0, 0), (1, 2), (2, 3)])
        composed = compose_scalar(_identity(g), h)
        ts, vs = composed.edge_breakpoints("e")
        assert ts == (0, 1, 2)
        assert vs == (0, 2, 3)

    def test_smooth_map_within_tolerance(self):
        g = MetricGraph.interval(3)
        u = shift(_identity(g), 1)
        composed = compose_scalar(u, math.sqrt, tol=1e-6)
        for k in range(61):
            x = g.point("e", 3 * k / 60)
            assert abs(float(composed(x)) - math.sqrt(float(u(x)))) <= 1e-6

    def test_undefined_map(self):
        g = MetricGraph.interval(1)
        with pytest.raises(ValueError, match="undefined"):
            compose_scalar(shift(_identity(g), -1), math.sqrt)

    def test_map_domain(self):
        h = PiecewiseLinearMap([(0, 0), (1, 1)])
        assert h.domain == (0, 1)
        with pytest.raises(ValueError):
            h(Q(3, 2))
        with pytest.raises(ValueError):
            PiecewiseLinearMap([(0, 0)])


class TestLipschitz:
    def test_ground_state_is_half_lipschitz(self, dumbbell, ground_state, rng):
        pairs = [(random_point(dumbbell, rng, exact=True), random_point(dumbbell, rng, exact=True)) for _ in range(50)]
        assert lipschitz_excess(ground_state, Q(1, 2), pairs) == 0
        assert ground_state.max_slope() == Q(1, 2)

    def test_excess_is_reported(self, unit_interval):
        u = scale(_identity(unit_interval), 2)
        pairs = [(unit_interval.resolve("a"), unit_interval.resolve("b"))]
        assert lipschitz_excess(u, 1, pairs) == 1

    def test_vertex_point(self, dumbbell, ground_state):
        assert ground_state(GraphPoint.at_vertex("V-1")) == Q(1, 2)

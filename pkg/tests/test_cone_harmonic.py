import math
from fractions import Fraction

import pytest

from inflap.cone_harmonic import (
    composition_check,
    cone_comparison_sampled,
    harnack_check,
    is_inf_subharmonic_exact,
    is_inf_superharmonic_exact,
    random_superharmonic,
    regularity_checks,
    status_of,
)
from inflap.const import CheckStatus
from inflap.metric_graph import GraphPoint, MetricGraph, boundary_distance_field, random_graph, random_point
from inflap.pl_calculus import PLFunction, constant, negate, pointwise_min, scale, shift
from inflap.report import Witness, inapplicable, verdict

Q = Fraction


@pytest.fixture
def vee(unit_interval) -> PLFunction:
    return PLFunction(unit_interval, {"e": [(0, Q(1, 2)), (Q(1, 2), 0), (1, Q(1, 2))]})


@pytest.fixture
def tent():
    g = MetricGraph.interval(2)
    return boundary_distance_field(g)


class TestExactSuperharmonic:
    def test_scaled_boundary_distance(self, dumbbell):
        u = scale(boundary_distance_field(dumbbell), Q(1, 2))
        assert is_inf_superharmonic_exact(u).status is CheckStatus.PASS

    def test_ground_states(self, ground_state, ground_state_plus):
        assert is_inf_superharmonic_exact(ground_state).passed
        assert is_inf_superharmonic_exact(ground_state_plus).passed

    def test_vee_fails_at_the_kink(self, vee):
        report = is_inf_superharmonic_exact(vee)
        assert report.status is CheckStatus.FAIL
        assert [w.point for w in report.witnesses] == [GraphPoint("e", Q(1, 2))]
        assert is_inf_subharmonic_exact(vee).passed

    def test_vertex_condition(self, star3):
        # outgoing derivatives 1, 1, -1 at the center: max + min = 0
        ok = PLFunction(star3, {"e0": [(0, 1), (1, 2)], "e1": [(0, 1), (1, 2)], "e2": [(0, 1), (1, 0)]})
        assert is_inf_superharmonic_exact(ok).passed
        bad = PLFunction(star3, {"e0": [(0, 1), (1, 2)], "e1": [(0, 1), (1, 2)], "e2": [(0, 1), (1, Q(1, 2))]})
        report = is_inf_superharmonic_exact(bad)
        assert report.status is CheckStatus.FAIL
        assert report.witnesses[0].point == GraphPoint.at_vertex("c")

    def test_closed_under_minimum(self, rng):
        for _ in range(100):
            g = random_graph(rng, n_vertices=int(rng.integers(3, 7)))
            parts = [random_superharmonic(g, rng, k=2) for _ in range(int(rng.integers(2, 5)))]
            assert is_inf_superharmonic_exact(pointwise_min(parts)).passed


class TestSampledCones:
    def test_ground_state_passes(self, ground_state):
        report = cone_comparison_sampled(ground_state, trials=500, seed=0)
        assert report.status is CheckStatus.PASS
        assert report.details["trials"] > 0

    def test_vee_is_caught(self, vee):
        report = cone_comparison_sampled(vee, trials=500, seed=0)
        assert report.status is CheckStatus.FAIL
        assert report.witnesses

    def test_agrees_with_the_exact_test(self, rng):
        for k in range(30):
            g = random_graph(rng, n_vertices=int(rng.integers(3, 7)))
            u = random_superharmonic(g, rng)
            assert is_inf_superharmonic_exact(u).passed
            assert cone_comparison_sampled(u, trials=40, seed=k).passed

    def test_failures_are_found_by_sampling(self, rng):
        instances, caught = 20, 0
        for k in range(instances):
            g = random_graph(rng, n_vertices=int(rng.integers(3, 7)))
            dip = scale(negate(boundary_distance_field(g)), Q(int(rng.integers(1, 9)), 4))
            u = shift(dip, int(rng.integers(0, 5)))
            assert not is_inf_superharmonic_exact(u).passed
            caught += not cone_comparison_sampled(u, trials=1000, seed=k).passed
        assert caught >= 0.95 * instances


class TestHarnack:
    @pytest.fixture
    def ramp(self):
        g = MetricGraph.interval(10)
        return PLFunction(g, {"e": [(0, 0), (10, 10)]})

    def test_linear_function(self, ramp):
        g = ramp.graph
        report = harnack_check(ramp, g.point("e", Q(49, 10)), Q(41, 10), 1)
        assert report.status is CheckStatus.PASS
        assert report.details["empirical_max_ratio"] == pytest.approx(59 / 39)
        assert report.details["sampled_max_ratio"] <= report.details["empirical_max_ratio"] + 1e-12
        assert report.details["constant"] == 3

    def test_radius_condition(self, ramp):
        report = harnack_check(ramp, ramp.graph.point("e", 5), 4, 1)
        assert report.status is CheckStatus.INAPPLICABLE

    def test_ball_must_stay_inside(self, ramp):
        report = harnack_check(ramp, ramp.graph.point("e", 2), 4, Q(1, 2))
        assert report.status is CheckStatus.INAPPLICABLE

    def test_negative_function(self):
        g = MetricGraph.interval(10)
        u = constant(g, -1)
        assert harnack_check(u, g.point("e", 5), 4, Q(1, 2)).status is CheckStatus.INAPPLICABLE

    def test_random_nonnegative_superharmonic(self, rng):
        for _ in range(200):
            g = random_graph(rng, n_vertices=int(rng.integers(3, 7)))
            u = random_superharmonic(g, rng, nonnegative=True)
            x0 = random_point(g, rng, exact=True)
            reach = boundary_distance_field(g)(x0)
            big_r = reach * Q(int(rng.integers(1, 9)), 8)
            r = big_r * Q(int(rng.integers(1, 8)), 32)
            report = harnack_check(u, x0, big_r, r, samples=20)
            assert report.status is CheckStatus.PASS, report.to_dict()


class TestRegularity:
    def test_boundary_distance(self, dumbbell):
        u = scale(boundary_distance_field(dumbbell), Q(1, 2))
        report = regularity_checks(u, samples=100, seed=0)
        assert report.status is CheckStatus.PASS
        assert report.details["lipschitz_violations"] == 0

    def test_ground_state(self, ground_state):
        assert regularity_checks(ground_state, samples=100, seed=1).passed

    def test_needs_superharmonic_input(self, vee):
        assert regularity_checks(vee).status is CheckStatus.INAPPLICABLE


class TestComposition:
    def test_square_root(self, tent):
        report = composition_check(shift(tent, 1), math.sqrt)
        assert report.status is CheckStatus.PASS
        assert report.details["increasing"] and report.details["concave"]

    def test_affine_map_is_flagged(self, tent):
        report = composition_check(shift(tent, 1), lambda y: 2 * y + 1)
        assert report.status is CheckStatus.PASS
        assert report.details["affine"]

    def test_convex_map(self, tent):
        square = lambda y: y * y  # noqa: E731
        assert composition_check(tent, square).status is CheckStatus.INAPPLICABLE
        forced = composition_check(tent, square, force=True)
        assert forced.status is CheckStatus.FAIL

    def test_vee_is_inapplicable(self, vee):
        assert composition_check(shift(vee, 1), math.sqrt).status is CheckStatus.INAPPLICABLE


def test_status_of():
    ok = verdict("a", [])
    skipped = inapplicable("b", "no")
    assert status_of([ok]) is CheckStatus.PASS
    assert status_of([ok, skipped]) is CheckStatus.INAPPLICABLE
    assert status_of([skipped, verdict("c", [Witness(None, 1)])]) is CheckStatus.FAIL

from fractions import Fraction

import pytest

from inflap.cone_harmonic import is_inf_superharmonic_exact
from inflap.const import CheckStatus, MongeClass
from inflap.eikonal import (
    BoundaryData,
    boundary_attainment,
    comparison_harness,
    dpp_check,
    mcshane_extension,
    monge_classify,
    random_boundary_data,
    random_ordered_pair,
)
from inflap.metric_graph import MetricGraph, Subdomain, ball, random_graph, random_point
from inflap.pl_calculus import PLFunction, constant, lipschitz_excess

Q = Fraction


class TestMcShane:
    def test_interval_with_steep_data(self, unit_interval):
        data = BoundaryData({"a": Q(0), "b": Q(1)})
        u = mcshane_extension(unit_interval, data, Q(2, 5))
        assert u.edge_breakpoints("e") == ((0, 1), (0, Q(2, 5)))
        assert u.vertex_value("b") == Q(2, 5)
        assert boundary_attainment(u, data) == {"a": True, "b": False}

    def test_lipschitz_data_is_attained(self, dumbbell):
        data = BoundaryData.constant(dumbbell, 0)
        u = mcshane_extension(dumbbell, data, Q(1, 2))
        assert all(boundary_attainment(u, data).values())
        assert u(dumbbell.resolve("P+")) == 1

    def test_extension_is_lambda_lipschitz_and_superharmonic(self, rng):
        g = random_graph(rng)
        lam = Q(3, 4)
        u = mcshane_extension(g, random_boundary_data(g, rng), lam)
        pairs = [(random_point(g, rng, exact=True), random_point(g, rng, exact=True)) for _ in range(1000)]
        assert lipschitz_excess(u, lam, pairs) == 0
        assert is_inf_superharmonic_exact(u).passed

    def test_incomplete_data(self, unit_interval):
        with pytest.raises(ValueError, match="missing boundary values"):
            mcshane_extension(unit_interval, BoundaryData({"a": Q(0)}), 1)

    def test_lambda_must_be_positive(self, unit_interval):
        with pytest.raises(ValueError):
            mcshane_extension(unit_interval, BoundaryData.constant(unit_interval), 0)

    def test_boundary_data_round_trip(self):
        data = BoundaryData.parse({"a": "1/2", "b": 2})
        assert data.values == {"a": Q(1, 2), "b": Q(2)}
        assert data.to_dict() == {"g": {"a": "1/2", "b": "2"}}


class TestMongeClassification:
    def test_extensions_are_solutions(self, rng):
        for _ in range(50):
            g = random_graph(rng)
            lam = Q(int(rng.integers(1, 9)), 4)
            u = mcshane_extension(g, random_boundary_data(g, rng), lam)
            report = monge_classify(u, lam)
            assert report.classification is MongeClass.SOLUTION
            assert not report.below and not report.above

    def test_flat_function_is_a_subsolution(self, unit_interval):
        report = monge_classify(constant(unit_interval, 1), 1)
        assert report.classification is MongeClass.SUBSOLUTION
        assert report.is_subsolution and not report.is_supersolution

    def test_steep_function_is_a_supersolution(self, unit_interval):
        u = PLFunction(unit_interval, {"e": [(0, 0), (1, 2)]})
        report = monge_classify(u, 1)
        assert report.classification is MongeClass.SUPERSOLUTION
        assert report.details["min_subslope"] == 2

    def test_mixed_slopes(self):
        g = MetricGraph.interval(2)
        u = PLFunction(g, {"e": [(0, 0), (1, Q(1, 2)), (2, Q(5, 2))]})
        assert monge_classify(u, 1).classification is MongeClass.NEITHER

    def test_report_dict(self, dumbbell, ground_state):
        out = monge_classify(ground_state, Q(1, 2)).to_dict()
        assert out["check"] == "monge"
        assert out["classification"] in {str(c) for c in MongeClass}


class TestDynamicProgramming:
    def test_extension_satisfies_the_identity(self):
        g = MetricGraph.interval(4)
        u = mcshane_extension(g, BoundaryData.constant(g, 0), 1)
        report = dpp_check(u, 1, Subdomain.edge_interval(g, "e", 1, 3), samples=40)
        assert report.status is CheckStatus.PASS

    def test_dumbbell_ball(self, dumbbell):
        u = mcshane_extension(dumbbell, BoundaryData.constant(dumbbell, 0), Q(1, 2))
        region = ball(dumbbell, dumbbell.resolve("O"), Q(1, 2))
        report = dpp_check(u, Q(1, 2), region, samples=40)
        assert report.status is CheckStatus.PASS
        assert report.details["points"] > 40

    def test_constant_fails(self):
        g = MetricGraph.interval(4)
        report = dpp_check(constant(g, 1), 1, Subdomain.edge_interval(g, "e", 1, 3), samples=40)
        assert report.status is CheckStatus.FAIL
        assert report.witnesses

    def test_region_touching_the_boundary(self):
        g = MetricGraph.interval(4)
        u = mcshane_extension(g, BoundaryData.constant(g, 0), 1)
        with pytest.raises(ValueError, match="compactly"):
            dpp_check(u, 1, Subdomain.edge_interval(g, "e", 0, 1))


class TestComparison:
    def test_random_ordered_pairs(self, rng):
        for _ in range(100):
            g = random_graph(rng)
            lam = Q(int(rng.integers(1, 9)), 4)
            u, v = random_ordered_pair(g, lam, rng)
            report = comparison_harness(u, v, lam, samples=20, seed=int(rng.integers(0, 2**31)))
            assert report.status is CheckStatus.PASS, report.to_dict()

    def test_unordered_boundary_values(self, unit_interval):
        low = mcshane_extension(unit_interval, BoundaryData.constant(unit_interval, 0), 1)
        high = mcshane_extension(unit_interval, BoundaryData.constant(unit_interval, 1), 1)
        report = comparison_harness(high, low, 1)
        assert report.status is CheckStatus.INAPPLICABLE

    def test_supersolution_in_the_lower_slot(self, unit_interval):
        steep = PLFunction(unit_interval, {"e": [(0, 0), (1, 2)]})
        report = comparison_harness(steep, steep, 1)
        assert report.status is CheckStatus.INAPPLICABLE

import math

import pytest

from inflap.const import CheckStatus
from inflap.euclid_grid import (
    Disk,
    Polygon,
    Rectangle,
    ball_consistency,
    build_grid_graph,
    grid_distortion_check,
    parse_domain,
    point_position,
    stencil_distortion,
    stencil_offsets,
)
from inflap.metric_graph import GraphPoint, validate
from inflap.perron_solver import principal_eigenvalue
from oracles import brute_grid


def _key(name: str) -> tuple[int, int]:
    i, j = name[1:].split("y")
    return int(i), int(j)


class TestStencil:
    def test_offsets(self):
        assert sorted(stencil_offsets(1)) == [(0, 1), (1, -1), (1, 0), (1, 1)]
        assert len(stencil_offsets(3)) == 16
        with pytest.raises(ValueError):
            stencil_offsets(0)

    def test_distortion_shrinks_with_radius(self):
        values = [stencil_distortion(k) for k in (1, 2, 3)]
        assert values[0] == pytest.approx(1 / math.cos(math.pi / 8))
        assert values[0] > values[1] > values[2] > 1


class TestBuildGrid:
    def test_unit_square_coarse(self):
        g = build_grid_graph(Rectangle(0, 0, 1, 1), 0.5, k=1)
        assert len(g.vertices) == 9
        assert len(g.edges) == 8
        assert g.interior_vertices == ("x1y1",)
        assert g.positions["x1y1"] == (0.5, 0.5)
        assert validate(g) == []

    def test_matches_exhaustive_construction(self):
        g = build_grid_graph(Rectangle(0, 0, 2, 1.5), 0.25, k=2)
        nodes, edges, boundary = brute_grid(8, 6, 0.25, 2)
        assert {_key(v) for v in g.vertices} == nodes
        assert {frozenset((_key(e.start), _key(e.end))) for e in g.edges} == edges
        assert {_key(v) for v in g.boundary} == boundary
        for e in g.edges:
            (i0, j0), (i1, j1) = _key(e.start), _key(e.end)
            assert float(e.length) == pytest.approx(0.25 * math.hypot(i1 - i0, j1 - j0))

    def test_hole_is_avoided(self):
        ring = [(0, 0), (4, 0), (4, 4), (0, 4)]
        hole = [(1.5, 1.5), (2.5, 1.5), (2.5, 2.5), (1.5, 2.5)]
        domain = Polygon(tuple(ring), (tuple(hole),))
        g = build_grid_graph(domain, 0.5, k=1)
        assert "x4y4" not in g.vertices
        for e in g.edges:
            (x0, y0), (x1, y1) = g.positions[e.start], g.positions[e.end]
            mx, my = (x0 + x1) / 2, (y0 + y1) / 2
            assert not (1.5 < mx < 2.5 and 1.5 < my < 2.5)
        assert "x3y3" in g.boundary

    def test_edges_do_not_cross_a_notch(self):
        ring = ((-1, -1), (5, -1), (5, 5), (0.9, 5), (0.9, 0.6), (0.6, 0.1), (0.3, 0.2), (0.3, 5), (-1, 5))
        notched = Polygon(ring)
        assert not notched.contains(0.6, 0.4)
        assert not notched.segment_inside((0, 0), (3, 2))
        assert notched.segment_inside((0, 0), (1, 0))
        g = build_grid_graph(notched, 1.0, k=3)
        assert not any({e.start, e.end} == {"x0y0", "x3y2"} for e in g.edges)
        for e in g.edges:
            assert notched.segment_inside(g.positions[e.start], g.positions[e.end])

    def test_polygon_clearance(self):
        square = Polygon(((0, 0), (4, 0), (4, 4), (0, 4)), (((1, 1), (2, 1), (2, 2), (1, 2)),))
        assert square.clearance(3, 3) == pytest.approx(1.0)
        assert square.clearance(0.5, 0.25) == pytest.approx(0.25)
        assert square.clearance(1.5, 1.5) == 0.0

    def test_empty_interior(self):
        with pytest.raises(ValueError, match="no interior"):
            build_grid_graph(Rectangle(0, 0, 1, 1), 1.0, k=1)

    def test_point_position(self):
        g = build_grid_graph(Rectangle(0, 0, 1, 1), 0.5, k=1)
        edge = next(e for e in g.edges if {e.start, e.end} == {"x1y1", "x2y1"})
        x, y = point_position(g, GraphPoint(edge.id, edge.length / 2))
        assert (x, y) == pytest.approx((0.75, 0.5))


class TestDomains:
    def test_parse(self):
        assert parse_domain({"shape": "disk", "radius": 2}) == Disk(2.0)
        assert parse_domain({"shape": "rectangle", "bounds": [0, 0, 1, 2]}) == Rectangle(0.0, 0.0, 1.0, 2.0)
        polygon = parse_domain({"shape": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]})
        assert isinstance(polygon, Polygon)
        assert not polygon.convex

    def test_malformed(self):
        with pytest.raises(ValueError):
            parse_domain({"shape": "hexagon"})
        with pytest.raises(ValueError):
            parse_domain({"shape": "disk"})
        with pytest.raises(ValueError):
            Disk(-1.0)


class TestExperiments:
    def test_distortion_bounds(self):
        domain = Rectangle(0, 0, 3, 3)
        g = build_grid_graph(domain, 0.25, k=2)
        report = grid_distortion_check(g, domain, 2, samples=200, seed=0)
        assert report.status is CheckStatus.PASS
        assert report.details["distortion"] == pytest.approx(stencil_distortion(2))

    def test_square_eigenvalue(self):
        g = build_grid_graph(Rectangle(0, 0, 1, 1), 0.1, k=3)
        lam, _ = principal_eigenvalue(g)
        assert 1.8 < float(lam) <= 2 + 1e-9

    def test_disk_eigenvalue_coarse(self):
        g = build_grid_graph(Disk(1.0), 0.1, k=3)
        lam, _ = principal_eigenvalue(g)
        assert 0.9 < float(lam) < 1.2

    @pytest.mark.slow
    def test_square_eigenvalue_fine(self):
        g = build_grid_graph(Rectangle(0, 0, 1, 1), 1 / 50, k=3)
        lam, _ = principal_eigenvalue(g)
        assert 1.9 <= float(lam) <= 2 + 1e-9

    @pytest.mark.slow
    def test_disk_consistency(self):
        report = ball_consistency(1.0, 1 / 50, 3)
        assert report.passed(), report.to_dict()
        assert report.to_dict()["passed"]

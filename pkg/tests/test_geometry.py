import math

import numpy as np
import pytest

from wirecov.errors import DegenerateWire, OutOfWorkspace
from wirecov.geometry import (
    ConvexPolygon,
    build_tessellation,
    clip_halfplane,
    edge_voronoi_cells,
    nearest_point_on_segment,
    point_locate,
    polygon_moments,
)

UNIT_SQUARE = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def random_convex_polygon(rng, n_target=8, scale=1.0):
    """Convex hull of random points, as a CCW ConvexPolygon."""
    from scipy.spatial import ConvexHull

    pts = rng.random((n_target * 3, 2)) * scale
    hull = ConvexHull(pts)
    verts = pts[hull.vertices]  # scipy returns CCW order in 2-D
    return ConvexPolygon(verts)


def riemann_second_moment(poly, q, n=2000):
    """Dense midpoint-rule oracle for the integral of |x-q|^2 over poly."""
    xs = np.array([v[0] for v in poly.verts])
    ys = np.array([v[1] for v in poly.verts])
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    gx = np.linspace(x0, x1, n, endpoint=False) + (x1 - x0) / (2 * n)
    gy = np.linspace(y0, y1, n, endpoint=False) + (y1 - y0) / (2 * n)
    X, Y = np.meshgrid(gx, gy)
    inside = np.ones(X.shape, dtype=bool)
    m = len(xs)
    for i in range(m):
        ax, ay = xs[i], ys[i]
        bx, by = xs[(i + 1) % m], ys[(i + 1) % m]
        inside &= (bx - ax) * (Y - ay) - (by - ay) * (X - ax) >= 0
    f = (X - q[0]) ** 2 + (Y - q[1]) ** 2
    cell = (x1 - x0) * (y1 - y0) / n / n
    return f[inside].sum() * cell


class TestClipHalfplane:
    def test_axis_aligned_cut(self):
        out = clip_halfplane(UNIT_SQUARE, (1, 0), 0.5)
        assert out is not None
        assert out.area == pytest.approx(0.5, abs=1e-12)
        xs = [v[0] for v in out.verts]
        assert max(xs) == pytest.approx(0.5, abs=1e-12)

    def test_halfplane_contains_polygon(self):
        out = clip_halfplane(UNIT_SQUARE, (1, 0), 2.0)
        assert out is not None
        assert set(out.verts) == set(UNIT_SQUARE.verts)

    def test_disjoint_halfplane(self):
        assert clip_halfplane(UNIT_SQUARE, (1, 0), -1.0) is None

    def test_clip_idempotent(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            poly = random_convex_polygon(rng)
            theta = rng.uniform(0, 2 * math.pi)
            n = (math.cos(theta), math.sin(theta))
            c = rng.uniform(-0.2, 1.2)
            once = clip_halfplane(poly, n, c)
            if once is None:
                continue
            twice = clip_halfplane(once, n, c)
            assert twice is not None
            assert twice.area == pytest.approx(once.area, rel=1e-12)


class TestPolygonMoments:
    def test_unit_square(self):
        m = polygon_moments(UNIT_SQUARE)
        assert m.area == pytest.approx(1.0, abs=1e-14)
        assert m.centroid == pytest.approx((0.5, 0.5), abs=1e-14)

    def test_square_second_moment_about_center(self):
        m = polygon_moments(UNIT_SQUARE)
        assert m.second_moment_about((0.5, 0.5)) == pytest.approx(1 / 6, rel=1e-13)

    def test_triangle_second_moment_vs_riemann(self):
        tri = ConvexPolygon([(0, 0), (1, 0), (0, 1)])
        m = polygon_moments(tri)
        oracle = riemann_second_moment(tri, (0.0, 0.0))
        assert m.second_moment_about((0.0, 0.0)) == pytest.approx(1 / 6, rel=1e-12)
        assert m.second_moment_about((0.0, 0.0)) == pytest.approx(oracle, rel=1e-3)

    def test_random_polygons_vs_riemann(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            poly = random_convex_polygon(rng)
            q = tuple(rng.random(2))
            m = polygon_moments(poly)
            oracle = riemann_second_moment(poly, q, n=1200)
            assert m.second_moment_about(q) == pytest.approx(oracle, rel=1e-4)


class TestNearestPointOnSegment:
    def test_foot_inside(self):
        q, d = nearest_point_on_segment((0.3, 0.7), ((0, 0), (1, 0)))
        assert q == pytest.approx((0.3, 0.0), abs=1e-15)
        assert d == pytest.approx(0.7, abs=1e-15)

    def test_clamp_to_endpoint(self):
        q, d = nearest_point_on_segment((2, 1), ((0, 0), (1, 0)))
        assert q == pytest.approx((1.0, 0.0), abs=1e-15)
        assert d == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_point_on_segment(self):
        q, d = nearest_point_on_segment((0.25, 0.0), ((0, 0), (1, 0)))
        assert q == pytest.approx((0.25, 0.0), abs=1e-15)
        assert d == 0.0


class TestBuildTessellation:
    def test_single_vertical_cut(self):
        ws, tess = build_tessellation(UNIT_SQUARE, [((1, 0), -0.5)])
        assert len(tess.polygons) == 2
        cents = sorted(tess.centroids)
        assert cents[0] == pytest.approx((0.25, 0.5), abs=1e-12)
        assert cents[1] == pytest.approx((0.75, 0.5), abs=1e-12)
        assert len(ws.wires) == 1

    def test_no_wires(self):
        ws, tess = build_tessellation(UNIT_SQUARE, [])
        assert len(tess.polygons) == 1
        assert tess.polygons[0].area == pytest.approx(1.0)
        # all_segments are exactly the boundary edges
        assert len(ws.all_segments) == 4
        assert all(s.owner[0] == "boundary" for s in ws.all_segments)

    def test_cross_cut(self):
        ws, tess = build_tessellation(
            UNIT_SQUARE, [((1, 0), -0.5), ((0, 1), -0.5)])
        assert len(tess.polygons) == 4
        for p in tess.polygons:
            assert p.area == pytest.approx(0.25, rel=1e-12)
        # interior wires are split at the crossing: 2 pieces each
        wire_segs = [s for s in ws.all_segments if s.owner[0] == "wire"]
        assert len(wire_segs) == 4
        # boundary edges are split at wire endpoints: 8 pieces
        bdry_segs = [s for s in ws.all_segments if s.owner[0] == "boundary"]
        assert len(bdry_segs) == 8

    def test_duplicate_wire_raises(self):
        with pytest.raises(DegenerateWire):
            build_tessellation(UNIT_SQUARE, [((1, 0), -0.5), ((-2, 0), 1.0)])

    def test_wire_outside_is_dropped(self):
        ws, tess = build_tessellation(UNIT_SQUARE, [((1, 0), -2.0)])
        assert ws.dropped == (0,)
        assert len(tess.polygons) == 1

    def test_partition_area(self):
        rng = np.random.default_rng(3)
        poly = random_convex_polygon(rng)
        wires = [((math.cos(a), math.sin(a)), -c)
                 for a, c in zip(rng.uniform(0, math.pi, 3), rng.uniform(0.3, 0.7, 3))]
        ws, tess = build_tessellation(poly, wires)
        total = sum(p.area for p in tess.polygons)
        assert total == pytest.approx(poly.area, rel=1e-9)

    def test_shared_sides_have_two_owners(self):
        ws, tess = build_tessellation(UNIT_SQUARE, [((1, 0), -0.5)])
        wire_sids = [i for i, s in enumerate(ws.all_segments) if s.owner[0] == "wire"]
        assert len(wire_sids) == 1
        assert len(tess.side_adjacency[wire_sids[0]]) == 2


class TestEdgeVoronoiCells:
    def test_unit_square_cells(self):
        cells = edge_voronoi_cells(UNIT_SQUARE)
        assert len(cells) == 4
        for c in cells:
            assert c.area == pytest.approx(0.25, rel=1e-12)
        bottom = cells[0]  # side (0,0)-(1,0)
        assert any(v == pytest.approx((0.5, 0.5), abs=1e-12) for v in bottom.verts)

    def test_equilateral_triangle_cells(self):
        tri = ConvexPolygon([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
        cells = edge_voronoi_cells(tri)
        incenter = (0.5, math.sqrt(3) / 6)
        for c in cells:
            assert c.area == pytest.approx(tri.area / 3, rel=1e-12)
            assert any(v == pytest.approx(incenter, abs=1e-12) for v in c.verts)

    def test_random_pentagon_nearest_side_oracle(self):
        rng = np.random.default_rng(5)
        poly = random_convex_polygon(rng, n_target=5)
        cells = edge_voronoi_cells(poly)
        edges = poly.edges()
        assert sum(c.area for c in cells) == pytest.approx(poly.area, rel=1e-9)
        hits = 0
        total = 0
        for _ in range(10000):
            p = rng.random(2) * 1.2 - 0.1
            if not poly.contains(p, -1e-9):
                continue
            total += 1
            dists = [nearest_point_on_segment(p, e)[1] for e in edges]
            j_near = int(np.argmin(dists))
            # skip ties: points on the medial axis belong to several cells
            srt = sorted(dists)
            if srt[1] - srt[0] < 1e-9:
                hits += 1
                continue
            if cells[j_near].contains(p, 1e-9):
                hits += 1
        assert total > 4000
        assert hits == total


class TestPointLocate:
    def test_bottom_region(self):
        _, tess = build_tessellation(UNIT_SQUARE, [((1, 0), -0.5)])
        k, j = point_locate(tess, (0.25, 0.1))
        side = tess.sides[k][j]
        # the side under (0.25, 0.1) is the bottom edge y = 0
        assert side.p1[1] == pytest.approx(0.0, abs=1e-12)
        assert side.p2[1] == pytest.approx(0.0, abs=1e-12)

    def test_centroid_locates_to_first_side(self):
        _, tess = build_tessellation(UNIT_SQUARE, [((1, 0), -0.5)])
        k, j = point_locate(tess, tess.centroids[0])
        assert (k, j) == (0, 0)  # lexicographic tie-break at the shared apex

    def test_on_side_tie_break(self):
        _, tess = build_tessellation(UNIT_SQUARE, [((1, 0), -0.5)])
        # point on the interior wire: first region listing it wins
        k, j = point_locate(tess, (0.5, 0.3))
        assert (k, j) == min(
            (kk, jj)
            for kk in range(2)
            for jj, s in enumerate(tess.sides[kk])
            if abs(s.p1[0] - 0.5) < 1e-9 and abs(s.p2[0] - 0.5) < 1e-9
        )

    def test_out_of_workspace(self):
        _, tess = build_tessellation(UNIT_SQUARE, [])
        with pytest.raises(OutOfWorkspace):
            point_locate(tess, (2.0, 2.0))

    def test_every_sample_locates(self):
        rng = np.random.default_rng(9)
        _, tess = build_tessellation(
            UNIT_SQUARE, [((1, 0), -0.5), ((0, 1), -0.4)])
        for _ in range(2000):
            p = tuple(rng.random(2))
            k, j = point_locate(tess, p)
            assert tess.polygons[k].contains(p, 1e-9)

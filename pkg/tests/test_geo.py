"""Geometry primitives: haversine and polygon containment vs independent oracles."""

import math
import random

import pytest

from hubmedian.geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    GeoPolygon,
    haversine_m,
    point_in_polygon,
    ring_area_deg2,
)

from _oracles import (
    convex_contains,
    haversine_reference,
    min_edge_distance,
    winding_number,
)

UNIT_SQUARE = GeoPolygon(
    (GeoPoint(0, 0), GeoPoint(1, 0), GeoPoint(1, 1), GeoPoint(0, 1))
)


class TestGeoPoint:
    def test_valid_ranges(self):
        GeoPoint(-180, -90)
        GeoPoint(180, 90)
        GeoPoint(0, 0)

    @pytest.mark.parametrize(
        "lon,lat",
        [(181, 0), (-181, 0), (0, 91), (0, -91), (math.nan, 0), (0, math.inf)],
    )
    def test_out_of_range_rejected(self, lon, lat):
        with pytest.raises(ValueError):
            GeoPoint(lon, lat)


class TestHaversine:
    def test_zero_distance(self):
        p = GeoPoint(74.3, 31.5)
        assert haversine_m(p, p) == 0.0

    def test_one_degree_latitude(self):
        a = GeoPoint(74.3, 31.0)
        b = GeoPoint(74.3, 32.0)
        expected = EARTH_RADIUS_M * math.pi / 180.0
        assert haversine_m(a, b) == pytest.approx(expected, rel=1e-12)

    def test_symmetry_bit_exact(self):
        rng = random.Random(7)
        for _ in range(500):
            a = GeoPoint(rng.uniform(-180, 180), rng.uniform(-89, 89))
            b = GeoPoint(rng.uniform(-180, 180), rng.uniform(-89, 89))
            assert haversine_m(a, b) == haversine_m(b, a)

    def test_matches_reference_formula(self):
        rng = random.Random(11)
        for _ in range(500):
            a = GeoPoint(rng.uniform(73, 76), rng.uniform(30, 33))
            b = GeoPoint(rng.uniform(73, 76), rng.uniform(30, 33))
            ref = haversine_reference(a.lon, a.lat, b.lon, b.lat)
            assert haversine_m(a, b) == pytest.approx(ref, rel=1e-9, abs=1e-6)

    def test_triangle_inequality(self):
        rng = random.Random(13)
        for _ in range(300):
            pts = [
                GeoPoint(rng.uniform(73, 76), rng.uniform(30, 33)) for _ in range(3)
            ]
            ab = haversine_m(pts[0], pts[1])
            bc = haversine_m(pts[1], pts[2])
            ac = haversine_m(pts[0], pts[2])
            assert ac <= ab + bc + 1e-6

    def test_antipodal_clamped(self):
        a = GeoPoint(0, 0)
        b = GeoPoint(180, 0)
        assert haversine_m(a, b) == pytest.approx(math.pi * EARTH_RADIUS_M, rel=1e-9)


class TestPolygonType:
    def test_needs_three_vertices(self):
        with pytest.raises(ValueError):
            GeoPolygon((GeoPoint(0, 0), GeoPoint(1, 0)))

    def test_rejects_closed_ring(self):
        with pytest.raises(ValueError):
            GeoPolygon((GeoPoint(0, 0), GeoPoint(1, 0), GeoPoint(1, 1), GeoPoint(0, 0)))

    def test_bbox(self):
        assert UNIT_SQUARE.bbox() == (0.0, 0.0, 1.0, 1.0)


class TestPointInPolygon:
    def test_interior_and_exterior(self):
        assert point_in_polygon(GeoPoint(0.5, 0.5), UNIT_SQUARE)
        assert not point_in_polygon(GeoPoint(1.5, 0.5), UNIT_SQUARE)
        assert not point_in_polygon(GeoPoint(-0.1, 0.5), UNIT_SQUARE)

    def test_boundary_counts_inside(self):
        assert point_in_polygon(GeoPoint(0.0, 0.5), UNIT_SQUARE)  # edge
        assert point_in_polygon(GeoPoint(0.5, 0.0), UNIT_SQUARE)  # edge
        assert point_in_polygon(GeoPoint(0.0, 0.0), UNIT_SQUARE)  # vertex
        assert point_in_polygon(GeoPoint(1.0, 1.0), UNIT_SQUARE)  # vertex

    def test_hole_excluded_boundary_included(self):
        hole = (
            GeoPoint(0.25, 0.25),
            GeoPoint(0.75, 0.25),
            GeoPoint(0.75, 0.75),
            GeoPoint(0.25, 0.75),
        )
        poly = GeoPolygon(UNIT_SQUARE.exterior, (hole,))
        assert not point_in_polygon(GeoPoint(0.5, 0.5), poly)  # inside hole
        assert point_in_polygon(GeoPoint(0.1, 0.1), poly)  # between rings
        assert point_in_polygon(GeoPoint(0.25, 0.5), poly)  # on hole boundary

    def test_concave_l_shape(self):
        l_shape = GeoPolygon(
            (
                GeoPoint(0, 0),
                GeoPoint(2, 0),
                GeoPoint(2, 1),
                GeoPoint(1, 1),
                GeoPoint(1, 2),
                GeoPoint(0, 2),
            )
        )
        assert point_in_polygon(GeoPoint(0.5, 1.5), l_shape)
        assert point_in_polygon(GeoPoint(1.5, 0.5), l_shape)
        assert not point_in_polygon(GeoPoint(1.5, 1.5), l_shape)  # notch

    def test_against_convex_oracle(self):
        rng = random.Random(3)
        for _ in range(40):
            # Random convex polygon: points on a wobbly circle, ccw by angle.
            k = rng.randint(3, 9)
            angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(k))
            ring = [
                (math.cos(t) * rng.uniform(0.8, 1.0), math.sin(t) * rng.uniform(0.8, 1.0))
                for t in angles
            ]
            hull = _convex_hull(ring)
            if len(hull) < 3:
                continue
            poly = GeoPolygon(tuple(GeoPoint(x, y) for x, y in hull))
            for _ in range(60):
                lon = rng.uniform(-1.2, 1.2)
                lat = rng.uniform(-1.2, 1.2)
                if min_edge_distance(hull, lon, lat) < 1e-9:
                    continue
                assert point_in_polygon(GeoPoint(lon, lat), poly) == convex_contains(
                    hull, lon, lat
                )

    def test_against_winding_oracle_concave(self):
        star = [
            (0.0, 1.0), (0.22, 0.31), (0.95, 0.31), (0.36, -0.12), (0.59, -0.81),
            (0.0, -0.38), (-0.59, -0.81), (-0.36, -0.12), (-0.95, 0.31), (-0.22, 0.31),
        ]
        poly = GeoPolygon(tuple(GeoPoint(x, y) for x, y in star))
        rng = random.Random(5)
        checked = 0
        for _ in range(2000):
            lon = rng.uniform(-1.1, 1.1)
            lat = rng.uniform(-1.1, 1.1)
            if min_edge_distance(star, lon, lat) < 1e-9:
                continue
            assert point_in_polygon(GeoPoint(lon, lat), poly) == (
                winding_number(star, lon, lat) != 0
            )
            checked += 1
        assert checked > 1500


def _convex_hull(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


class TestRingArea:
    def test_unit_square(self):
        assert ring_area_deg2(UNIT_SQUARE.exterior) == 1.0

    def test_degenerate_line(self):
        ring = (GeoPoint(0, 0), GeoPoint(1, 0), GeoPoint(2, 0))
        assert ring_area_deg2(ring) == 0.0

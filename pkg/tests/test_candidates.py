"""Lattice generation over region polygons, node snapping, and candidate CSV IO."""

import io
import json
import logging
import math

import pytest

from hubmedian import (
    Candidate,
    CandidateSet,
    GeoPoint,
    GeoPolygon,
    InputError,
    generate_grid,
    haversine_m,
    load_candidates,
    load_region,
    point_in_polygon,
    save_candidates,
    snap_candidates,
)
from _synth import CITY_LAT, CITY_LON, grid_city, square_region

METERS_PER_DEGREE = 111_195.0


def _region_json(**kwargs):
    square = square_region(3000.0)
    ring = [[p.lon, p.lat] for p in square.exterior]
    ring.append(ring[0])
    geometry = {"type": "Polygon", "coordinates": [ring]}
    return geometry, ring


class TestGenerateGrid:
    def test_three_km_square_yields_nine_points(self):
        region = square_region(3000.0)
        points = generate_grid(region, spacing_m=1300.0)
        assert len(points) == 9

    def test_small_square_yields_single_point(self):
        region = square_region(1000.0)
        points = generate_grid(region, spacing_m=1300.0)
        assert len(points) == 1
        lon_min, lat_min, _, _ = region.bbox()
        assert points[0] == GeoPoint(lon_min, lat_min)

    def test_row_major_south_to_north_west_to_east(self):
        points = generate_grid(square_region(3000.0), spacing_m=1300.0)
        rows = [points[0:3], points[3:6], points[6:9]]
        for row in rows:
            assert len({p.lat for p in row}) == 1
            assert row[0].lon < row[1].lon < row[2].lon
        assert rows[0][0].lat < rows[1][0].lat < rows[2][0].lat

    def test_adjacent_points_sit_one_spacing_apart(self):
        spacing = 1300.0
        points = generate_grid(square_region(3000.0), spacing_m=spacing)
        # Along a row (east neighbor) and along a column (north neighbor).
        assert haversine_m(points[0], points[1]) == pytest.approx(spacing, rel=0.01)
        assert haversine_m(points[0], points[3]) == pytest.approx(spacing, rel=0.01)

    def test_all_points_inside_region(self):
        region = square_region(5000.0)
        for pt in generate_grid(region, spacing_m=700.0):
            assert point_in_polygon(pt, region)

    def test_points_outside_are_clipped(self):
        # Right triangle occupying the NE half of its own bounding box: the
        # box's SW anchor is outside, so a coarse lattice finds nothing.
        tri = GeoPolygon(
            (GeoPoint(0.0, 0.001), GeoPoint(0.001, 0.0), GeoPoint(0.001, 0.001))
        )
        assert generate_grid(tri, spacing_m=1300.0) == []

    def test_multipolygon_parts_share_one_lattice(self):
        a = square_region(3000.0, lon0=74.30)
        b = square_region(3000.0, lon0=74.38)
        points = generate_grid([a, b], spacing_m=1300.0)
        in_a = [p for p in points if point_in_polygon(p, a)]
        in_b = [p for p in points if point_in_polygon(p, b)]
        assert len(in_a) + len(in_b) == len(points)
        assert in_a and in_b

    def test_spacing_must_be_positive(self):
        region = square_region(1000.0)
        with pytest.raises(InputError):
            generate_grid(region, spacing_m=0.0)
        with pytest.raises(InputError):
            generate_grid(region, spacing_m=-5.0)
        with pytest.raises(InputError):
            generate_grid(region, spacing_m=math.nan)

    def test_empty_part_list_rejected(self):
        with pytest.raises(InputError):
            generate_grid([], spacing_m=1300.0)

    def test_spacing_controls_density(self):
        region = square_region(3000.0)
        coarse = generate_grid(region, spacing_m=1300.0)
        fine = generate_grid(region, spacing_m=650.0)
        assert len(fine) > len(coarse)


class TestSnapCandidates:
    def test_snaps_to_nearest_node(self):
        g = grid_city(3, 3)
        raw = [g.positions[4]]
        cset = snap_candidates(g, raw)
        assert len(cset) == 1
        c = cset.candidates[0]
        assert c.node == 4
        assert c.snap_m == 0.0
        assert c.candidate_id == "c0000"
        assert c.node_id == g.node_ids[4]

    def test_far_points_dropped_with_warning(self, caplog):
        g = grid_city(3, 3)
        far = GeoPoint(CITY_LON + 1.0, CITY_LAT)
        with caplog.at_level(logging.WARNING, logger="hubmedian.candidates"):
            cset = snap_candidates(g, [g.positions[0], far], max_snap_m=650.0)
        assert len(cset) == 1
        assert "dropped 1" in caplog.text

    def test_shared_node_keeps_first_point(self, caplog):
        g = grid_city(3, 3)
        node_pt = g.positions[0]
        nudge = GeoPoint(node_pt.lon + 1e-6, node_pt.lat)
        with caplog.at_level(logging.INFO, logger="hubmedian.candidates"):
            cset = snap_candidates(g, [node_pt, nudge, g.positions[8]])
        assert [c.candidate_id for c in cset.candidates] == ["c0000", "c0002"]
        assert cset.candidates[0].point == node_pt
        assert "collapsed 1" in caplog.text

    def test_ids_encode_raw_position(self):
        g = grid_city(3, 3)
        far = GeoPoint(CITY_LON + 1.0, CITY_LAT)
        cset = snap_candidates(g, [far, g.positions[1], g.positions[2]])
        assert [c.candidate_id for c in cset.candidates] == ["c0001", "c0002"]

    def test_empty_input_allowed(self):
        g = grid_city(2, 2)
        cset = snap_candidates(g, [], spacing_m=1300.0)
        assert len(cset) == 0
        assert cset.spacing_m == 1300.0

    def test_snap_distance_recorded(self):
        g = grid_city(3, 3, spacing_m=1000.0)
        base = g.positions[0]
        off = GeoPoint(base.lon, base.lat + 100.0 / METERS_PER_DEGREE)
        cset = snap_candidates(g, [off])
        assert cset.candidates[0].snap_m == pytest.approx(100.0, rel=1e-3)


class TestCandidateSet:
    def test_duplicate_id_rejected(self):
        c1 = Candidate("c0", GeoPoint(0, 0), 0, "a", 0.0)
        c2 = Candidate("c0", GeoPoint(0, 1), 1, "b", 0.0)
        with pytest.raises(InputError):
            CandidateSet((c1, c2))

    def test_shared_node_rejected(self):
        c1 = Candidate("c0", GeoPoint(0, 0), 3, "a", 0.0)
        c2 = Candidate("c1", GeoPoint(0, 1), 3, "a", 1.0)
        with pytest.raises(InputError):
            CandidateSet((c1, c2))

    def test_ids_and_nodes_accessors(self):
        c1 = Candidate("c0", GeoPoint(0, 0), 5, "a", 0.0)
        c2 = Candidate("c1", GeoPoint(0, 1), 2, "b", 1.0)
        cset = CandidateSet((c1, c2))
        assert cset.ids == ["c0", "c1"]
        assert cset.nodes == [5, 2]
        assert len(cset) == 2


class TestCandidateCSV:
    def _sample_set(self, g):
        raw = [g.positions[0], g.positions[4], g.positions[8]]
        return snap_candidates(g, raw)

    def test_round_trip(self, tmp_path):
        g = grid_city(3, 3)
        cset = self._sample_set(g)
        path = tmp_path / "candidates.csv"
        save_candidates(cset, path)
        text = path.read_text()
        assert text.startswith("candidate_id,lon,lat,node_id,snap_m\n")
        assert "\r" not in text
        back = load_candidates(path, g)
        assert back.candidates == cset.candidates

    def test_round_trip_in_memory(self):
        g = grid_city(3, 3)
        cset = self._sample_set(g)
        buf = io.StringIO()
        save_candidates(cset, buf)
        back = load_candidates(io.StringIO(buf.getvalue()), g)
        assert back.candidates == cset.candidates

    def test_wrong_header(self):
        g = grid_city(2, 2)
        with pytest.raises(InputError, match="header"):
            load_candidates(io.StringIO("id,lon,lat,node,snap\n"), g)

    def test_field_count_error_names_line(self):
        g = grid_city(2, 2)
        text = "candidate_id,lon,lat,node_id,snap_m\nc0,74.3,31.5,g0_0\n"
        with pytest.raises(InputError, match="line 2"):
            load_candidates(io.StringIO(text), g)

    def test_bad_number_names_line(self):
        g = grid_city(2, 2)
        text = "candidate_id,lon,lat,node_id,snap_m\nc0,74.3,oops,g0_0,0\n"
        with pytest.raises(InputError, match="line 2"):
            load_candidates(io.StringIO(text), g)

    def test_negative_snap_rejected(self):
        g = grid_city(2, 2)
        text = "candidate_id,lon,lat,node_id,snap_m\nc0,74.3,31.5,g0_0,-1\n"
        with pytest.raises(InputError, match="snap_m"):
            load_candidates(io.StringIO(text), g)

    def test_unknown_node_id(self):
        g = grid_city(2, 2)
        text = "candidate_id,lon,lat,node_id,snap_m\nc0,74.3,31.5,nowhere,0\n"
        with pytest.raises(InputError):
            load_candidates(io.StringIO(text), g)

    def test_no_rows(self):
        g = grid_city(2, 2)
        with pytest.raises(InputError, match="no candidates"):
            load_candidates(io.StringIO("candidate_id,lon,lat,node_id,snap_m\n"), g)


class TestLoadRegion:
    def test_bare_polygon_geometry(self):
        geometry, ring = _region_json()
        parts = load_region(io.StringIO(json.dumps(geometry)))
        assert len(parts) == 1
        assert len(parts[0].exterior) == len(ring) - 1

    def test_feature_wrapper(self):
        geometry, _ = _region_json()
        doc = {"type": "Feature", "properties": {}, "geometry": geometry}
        assert len(load_region(io.StringIO(json.dumps(doc)))) == 1

    def test_single_feature_collection(self):
        geometry, _ = _region_json()
        doc = {
            "type": "FeatureCollection",
            "features": [{"type": "Feature", "properties": {}, "geometry": geometry}],
        }
        assert len(load_region(io.StringIO(json.dumps(doc)))) == 1

    def test_multipolygon_parts(self):
        geometry, ring = _region_json()
        shifted = [[lon + 1.0, lat] for lon, lat in ring]
        doc = {"type": "MultiPolygon", "coordinates": [[ring], [shifted]]}
        parts = load_region(io.StringIO(json.dumps(doc)))
        assert len(parts) == 2

    def test_hole_ring_preserved(self):
        outer = [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]]
        inner = [[4, 4], [6, 4], [6, 6], [4, 6], [4, 4]]
        doc = {"type": "Polygon", "coordinates": [outer, inner]}
        (poly,) = load_region(io.StringIO(json.dumps(doc)))
        assert point_in_polygon(GeoPoint(1.0, 1.0), poly)
        assert not point_in_polygon(GeoPoint(5.0, 5.0), poly)

    def test_multi_feature_collection_rejected(self):
        geometry, _ = _region_json()
        feat = {"type": "Feature", "properties": {}, "geometry": geometry}
        doc = {"type": "FeatureCollection", "features": [feat, feat]}
        with pytest.raises(InputError, match="exactly one"):
            load_region(io.StringIO(json.dumps(doc)))

    def test_invalid_json(self):
        with pytest.raises(InputError, match="JSON"):
            load_region(io.StringIO("{not json"))

    def test_unclosed_ring_rejected(self):
        ring = [[0, 0], [1, 0], [1, 1], [0, 1]]
        doc = {"type": "Polygon", "coordinates": [ring]}
        with pytest.raises(InputError, match="closed"):
            load_region(io.StringIO(json.dumps(doc)))

    def test_short_ring_rejected(self):
        doc = {"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [0, 0]]]}
        with pytest.raises(InputError, match="at least 4"):
            load_region(io.StringIO(json.dumps(doc)))

    def test_wrong_geometry_type(self):
        doc = {"type": "Point", "coordinates": [0, 0]}
        with pytest.raises(InputError):
            load_region(io.StringIO(json.dumps(doc)))

    def test_feature_without_geometry(self):
        doc = {"type": "Feature", "properties": {}}
        with pytest.raises(InputError, match="geometry"):
            load_region(io.StringIO(json.dumps(doc)))

    def test_non_object_root(self):
        with pytest.raises(InputError):
            load_region(io.StringIO("[1, 2, 3]"))

    def test_empty_multipolygon(self):
        doc = {"type": "MultiPolygon", "coordinates": []}
        with pytest.raises(InputError, match="no parts"):
            load_region(io.StringIO(json.dumps(doc)))

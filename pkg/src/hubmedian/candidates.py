"""Candidate hub lattice: grid generation over a region polygon and node snapping."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from ._fileio import TextSource, open_text_read, open_text_write, source_name
from .errors import InputError
from .geo import GeoPoint, GeoPolygon, point_in_polygon
from .graph import NodeRef, RoadGraph, snap_many

log = logging.getLogger(__name__)

# Meridian degree length at city scale; the lattice uses it for both axes
# (longitude scaled by cos of the bounding box's mean latitude).
METERS_PER_DEGREE = 111_195.0

CANDIDATES_HEADER = ["candidate_id", "lon", "lat", "node_id", "snap_m"]


@dataclass(frozen=True)
class Candidate:
    candidate_id: str
    point: GeoPoint
    node: NodeRef
    node_id: str
    snap_m: float


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple[Candidate, ...]
    spacing_m: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        seen_ids: set[str] = set()
        seen_nodes: set[NodeRef] = set()
        for c in self.candidates:
            if c.candidate_id in seen_ids:
                raise InputError(f"duplicate candidate_id {c.candidate_id!r}")
            if c.node in seen_nodes:
                raise InputError(f"two candidates share node {c.node_id!r}")
            seen_ids.add(c.candidate_id)
            seen_nodes.add(c.node)

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def ids(self) -> list[str]:
        return [c.candidate_id for c in self.candidates]

    @property
    def nodes(self) -> list[NodeRef]:
        return [c.node for c in self.candidates]


def load_region(source: TextSource) -> list[GeoPolygon]:
    """Read a GeoJSON Polygon or MultiPolygon into polygon parts.

    Accepts a bare geometry, a Feature, or a FeatureCollection holding exactly
    one feature. GeoJSON rings arrive closed; the repeated final vertex is
    dropped.
    """
    with open_text_read(source) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise InputError(f"{source_name(source)}: not valid JSON ({exc})") from None
    geometry = _extract_geometry(doc, source_name(source))
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        return [_polygon_from_coords(coords)]
    if gtype == "MultiPolygon":
        if not coords:
            raise InputError("MultiPolygon has no parts")
        return [_polygon_from_coords(part) for part in coords]
    raise InputError(f"region geometry must be Polygon or MultiPolygon, got {gtype!r}")


def _extract_geometry(doc: dict, name: str) -> dict:
    if not isinstance(doc, dict):
        raise InputError(f"{name}: GeoJSON root must be an object")
    dtype = doc.get("type")
    if dtype == "FeatureCollection":
        features = doc.get("features", [])
        if len(features) != 1:
            raise InputError(f"{name}: expected exactly one region feature, found {len(features)}")
        doc = features[0]
        dtype = doc.get("type")
    if dtype == "Feature":
        geometry = doc.get("geometry")
        if not isinstance(geometry, dict):
            raise InputError(f"{name}: feature has no geometry")
        return geometry
    if dtype in ("Polygon", "MultiPolygon"):
        return doc
    raise InputError(f"{name}: unsupported GeoJSON type {dtype!r}")


def _unclose_ring(ring: Sequence[Sequence[float]]) -> tuple[GeoPoint, ...]:
    if len(ring) < 4:
        raise InputError(f"polygon ring has {len(ring)} positions, need at least 4 (closed)")
    if ring[0] != ring[-1]:
        raise InputError("polygon ring is not closed (first position != last)")
    try:
        return tuple(GeoPoint(float(p[0]), float(p[1])) for p in ring[:-1])
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"bad ring coordinates: {exc}") from None


def _polygon_from_coords(coords) -> GeoPolygon:
    if not coords:
        raise InputError("polygon has no rings")
    exterior = _unclose_ring(coords[0])
    holes = tuple(_unclose_ring(r) for r in coords[1:])
    return GeoPolygon(exterior, holes)


def generate_grid(
    region: GeoPolygon | Sequence[GeoPolygon], spacing_m: float = 1300.0
) -> list[GeoPoint]:
    """Axis-aligned lattice clipped to the region, in row-major order.

    Anchored at the joint bounding box's southwest corner; steps are
    spacing/111,195 degrees of latitude and spacing/(111,195 cos(mean lat))
    degrees of longitude. Rows run south to north, columns west to east. A
    region too small to contain any lattice point yields an empty list.
    """
    if not (math.isfinite(spacing_m) and spacing_m > 0):
        raise InputError(f"spacing_m must be positive, got {spacing_m}")
    parts = [region] if isinstance(region, GeoPolygon) else list(region)
    if not parts:
        raise InputError("region has no polygon parts")
    boxes = [p.bbox() for p in parts]
    lon_min = min(b[0] for b in boxes)
    lat_min = min(b[1] for b in boxes)
    lon_max = max(b[2] for b in boxes)
    lat_max = max(b[3] for b in boxes)
    mean_lat = (lat_min + lat_max) / 2.0
    lat_step = spacing_m / METERS_PER_DEGREE
    lon_scale = math.cos(math.radians(mean_lat))
    if lon_scale <= 0:
        raise InputError("region latitude too extreme for a lon/lat lattice")
    lon_step = spacing_m / (METERS_PER_DEGREE * lon_scale)
    n_rows = int(math.floor((lat_max - lat_min) / lat_step)) + 1
    n_cols = int(math.floor((lon_max - lon_min) / lon_step)) + 1
    points: list[GeoPoint] = []
    for r in range(n_rows):
        lat = lat_min + r * lat_step
        for c in range(n_cols):
            pt = GeoPoint(lon_min + c * lon_step, lat)
            if any(point_in_polygon(pt, part) for part in parts):
                points.append(pt)
    return points


def snap_candidates(
    graph: RoadGraph,
    raw: Sequence[GeoPoint],
    max_snap_m: float = 650.0,
    *,
    spacing_m: float | None = None,
) -> CandidateSet:
    """Snap lattice points to graph nodes, dropping far points and node dupes.

    Points snapping farther than max_snap_m are dropped (count logged); when
    several points share a nearest node, the first in row-major order wins.
    Candidate ids encode the surviving point's position in the raw list.
    """
    if not raw:
        return CandidateSet((), spacing_m)
    refs, dists = snap_many(graph, raw)
    kept: list[Candidate] = []
    used_nodes: set[int] = set()
    dropped_far = 0
    dropped_dup = 0
    for i, pt in enumerate(raw):
        node = int(refs[i])
        snap = float(dists[i])
        if snap > max_snap_m:
            dropped_far += 1
            continue
        if node in used_nodes:
            dropped_dup += 1
            continue
        used_nodes.add(node)
        kept.append(Candidate(f"c{i:04d}", pt, node, graph.node_ids[node], snap))
    if dropped_far:
        log.warning("dropped %d candidate(s) snapping farther than %.0f m", dropped_far, max_snap_m)
    if dropped_dup:
        log.info("collapsed %d candidate(s) sharing a node with an earlier one", dropped_dup)
    return CandidateSet(tuple(kept), spacing_m)


def save_candidates(cset: CandidateSet, sink: TextSource) -> None:
    with open_text_write(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CANDIDATES_HEADER)
        for c in cset.candidates:
            writer.writerow([c.candidate_id, repr(c.point.lon), repr(c.point.lat), c.node_id, repr(c.snap_m)])


def load_candidates(source: TextSource, graph: RoadGraph) -> CandidateSet:
    """Read a candidate CSV back, resolving node_id against the given graph."""
    name = source_name(source)
    out: list[Candidate] = []
    with open_text_read(source) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CANDIDATES_HEADER:
            raise InputError(
                f"{name}: expected header {','.join(CANDIDATES_HEADER)!r}, got "
                f"{','.join(header) if header else '<empty file>'!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise InputError(f"{name} line {line_no}: expected 5 fields, found {len(row)}")
            cid, lon_s, lat_s, node_id, snap_s = row
            try:
                pt = GeoPoint(float(lon_s), float(lat_s))
                snap = float(snap_s)
            except ValueError as exc:
                raise InputError(f"{name} line {line_no}: {exc}") from None
            if not (math.isfinite(snap) and snap >= 0):
                raise InputError(f"{name} line {line_no}: snap_m must be non-negative")
            node = graph.index_of(node_id)
            out.append(Candidate(cid, pt, node, node_id, snap))
    if not out:
        raise InputError(f"{name}: no candidates")
    return CandidateSet(tuple(out))

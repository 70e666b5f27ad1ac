"""Demand points: delivery ingestion, seeded subsampling, and population synthesis.

The population path mirrors a census workflow: integer region weights are
scaled to a fixed total by largest-remainder apportionment, then each region
receives exactly its scaled count of uniform points drawn by bounding-box
rejection sampling. All randomness comes from the portable generator in
``rng``; for each point the longitude is drawn before the latitude, and a
rejected draw consumes both, so fixed seeds reproduce bit-identical output.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from ._fileio import TextSource, open_text_read, open_text_write, source_name
from .errors import InputError
from .geo import GeoPoint, GeoPolygon, point_in_polygon, ring_area_deg2
from .graph import NodeRef, RoadGraph, snap_many
from .rng import Xoshiro256StarStar

log = logging.getLogger(__name__)

DEMAND_HEADER = ["delivery_id", "lon", "lat"]

# Consecutive misses allowed per point before a polygon is declared degenerate.
REJECTION_CAP = 10_000


@dataclass(frozen=True)
class DemandPoint:
    delivery_id: str
    point: GeoPoint
    node: NodeRef


@dataclass(frozen=True)
class DemandSet:
    points: tuple[DemandPoint, ...]
    source_tag: str
    skipped_rows: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise InputError("empty demand set")
        if self.source_tag not in ("deliveries", "population"):
            raise InputError(f"unknown demand source_tag {self.source_tag!r}")
        seen: set[str] = set()
        for p in self.points:
            if p.delivery_id in seen:
                raise InputError(f"duplicate delivery_id {p.delivery_id!r}")
            seen.add(p.delivery_id)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def ids(self) -> list[str]:
        return [p.delivery_id for p in self.points]

    @property
    def nodes(self) -> list[NodeRef]:
        return [p.node for p in self.points]


@dataclass(frozen=True)
class WeightedRegion:
    name: str
    polygon: GeoPolygon
    count: int

    def __post_init__(self) -> None:
        if self.count < 0:
            raise InputError(f"region {self.name!r} has negative count {self.count}")


def load_deliveries(source: TextSource, graph: RoadGraph) -> DemandSet:
    """Read `delivery_id,lon,lat` rows, dropping invalid coordinates.

    Rows whose lon/lat fail to parse or fall outside valid ranges are skipped
    and counted; structural problems (bad header, wrong field count, duplicate
    ids) are errors.
    """
    name = source_name(source)
    ids: list[str] = []
    pts: list[GeoPoint] = []
    skipped = 0
    with open_text_read(source) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != DEMAND_HEADER:
            raise InputError(
                f"{name}: expected header {','.join(DEMAND_HEADER)!r}, got "
                f"{','.join(header) if header else '<empty file>'!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputError(f"{name} line {line_no}: expected 3 fields, found {len(row)}")
            did, lon_s, lat_s = row
            if not did:
                raise InputError(f"{name} line {line_no}: empty delivery_id")
            try:
                pt = GeoPoint(float(lon_s), float(lat_s))
            except ValueError:
                skipped += 1
                continue
            ids.append(did)
            pts.append(pt)
    if skipped:
        log.warning("%s: skipped %d row(s) with invalid coordinates", name, skipped)
    if not ids:
        raise InputError(f"{name}: empty demand set (no valid rows)")
    refs, _ = snap_many(graph, pts)
    points = tuple(
        DemandPoint(did, pt, int(ref)) for did, pt, ref in zip(ids, pts, refs)
    )
    return DemandSet(points, "deliveries", skipped)


def sample_demand(demand: DemandSet, n: int, seed: int) -> DemandSet:
    """Uniform sample of n points without replacement, original order kept."""
    a = len(demand)
    if not (1 <= n <= a):
        raise InputError(f"sample size {n} outside [1, {a}]")
    if n == a:
        return DemandSet(demand.points, demand.source_tag, demand.skipped_rows)
    rng = Xoshiro256StarStar(seed)
    idx = list(range(a))
    for i in range(n):
        j = i + rng.randbelow(a - i)
        idx[i], idx[j] = idx[j], idx[i]
    chosen = sorted(idx[:n])
    return DemandSet(
        tuple(demand.points[i] for i in chosen), demand.source_tag, demand.skipped_rows
    )


def scale_weights(raw_counts: Sequence[tuple[str, int]], total: int) -> list[tuple[str, int]]:
    """Largest-remainder apportionment of `total` across integer weights.

    Each weight gets floor(raw * total / sum); leftover units go to the
    largest integer remainders, ties resolved by input order. Exact integer
    arithmetic; the output always sums to `total`.
    """
    if total < 1:
        raise InputError(f"total must be >= 1, got {total}")
    if not raw_counts:
        raise InputError("no weights given")
    for name, raw in raw_counts:
        if raw < 0:
            raise InputError(f"weight {name!r} is negative ({raw})")
    s = sum(raw for _, raw in raw_counts)
    if s == 0:
        raise InputError("all weights are zero")
    floors = []
    remainders = []
    for i, (name, raw) in enumerate(raw_counts):
        q, r = divmod(raw * total, s)
        floors.append(q)
        remainders.append((-r, i))
    leftover = total - sum(floors)
    for _, i in sorted(remainders)[:leftover]:
        floors[i] += 1
    return [(name, floors[i]) for i, (name, _) in enumerate(raw_counts)]


def load_region_weights(source: TextSource) -> list[tuple[str, GeoPolygon, int]]:
    """Read raw (unscaled) region weights from a GeoJSON FeatureCollection.

    Each feature must be a Polygon carrying `name` (string) and `population`
    (non-negative integer) properties. Feature order is preserved.
    """
    from .candidates import _polygon_from_coords

    name = source_name(source)
    with open_text_read(source) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise InputError(f"{name}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise InputError(f"{name}: weights file must be a GeoJSON FeatureCollection")
    features = doc.get("features", [])
    if not features:
        raise InputError(f"{name}: no features")
    out: list[tuple[str, GeoPolygon, int]] = []
    seen: set[str] = set()
    for k, feat in enumerate(features):
        where = f"{name} feature {k}"
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            raise InputError(f"{where}: not a Feature")
        geom = feat.get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise InputError(f"{where}: geometry must be Polygon, got {geom.get('type')!r}")
        props = feat.get("properties") or {}
        rname = props.get("name")
        pop = props.get("population")
        if not isinstance(rname, str) or not rname:
            raise InputError(f"{where}: missing string property 'name'")
        if not isinstance(pop, int) or isinstance(pop, bool) or pop < 0:
            raise InputError(f"{where}: property 'population' must be a non-negative integer")
        if rname in seen:
            raise InputError(f"{where}: duplicate region name {rname!r}")
        seen.add(rname)
        out.append((rname, _polygon_from_coords(geom.get("coordinates")), pop))
    return out


def generate_population_demand(
    regions: Sequence[WeightedRegion], graph: RoadGraph, seed: int
) -> DemandSet:
    """Draw exactly `count` uniform points per region, snapped to the graph.

    Regions are processed in input order from a single seeded stream. Points
    are rejection-sampled over each polygon's bounding box; a zero-area
    polygon with a positive count is an error, as is exceeding the rejection
    cap for any single point.
    """
    if not regions:
        raise InputError("no regions given")
    rng = Xoshiro256StarStar(seed)
    ids: list[str] = []
    pts: list[GeoPoint] = []
    serial = 0
    for region in regions:
        if region.count == 0:
            continue
        if ring_area_deg2(region.polygon.exterior) == 0.0:
            raise InputError(f"region {region.name!r} has zero area but count {region.count}")
        lon_min, lat_min, lon_max, lat_max = region.polygon.bbox()
        for _ in range(region.count):
            for _attempt in range(REJECTION_CAP):
                lon = rng.uniform(lon_min, lon_max)
                lat = rng.uniform(lat_min, lat_max)
                pt = GeoPoint(lon, lat)
                if point_in_polygon(pt, region.polygon):
                    break
            else:
                raise InputError(
                    f"region {region.name!r}: {REJECTION_CAP} consecutive rejections; "
                    "polygon is degenerate relative to its bounding box"
                )
            ids.append(f"p{serial:05d}")
            pts.append(pt)
            serial += 1
    if not pts:
        raise InputError("all region counts are zero")
    refs, _ = snap_many(graph, pts)
    points = tuple(DemandPoint(did, pt, int(ref)) for did, pt, ref in zip(ids, pts, refs))
    return DemandSet(points, "population")


def save_demand(demand: DemandSet, sink: TextSource) -> None:
    with open_text_write(sink) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(DEMAND_HEADER)
        for p in demand.points:
            writer.writerow([p.delivery_id, repr(p.point.lon), repr(p.point.lat)])

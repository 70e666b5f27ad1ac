"""Geodesic primitives: WGS84 points, polygons, great-circle distance, containment."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import asin, cos, radians, sin, sqrt

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate (degrees). Immutable."""

    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat}")


@dataclass(frozen=True)
class GeoPolygon:
    """Polygon with an exterior ring and optional holes.

    Rings are ordered vertex lists, implicitly closed: the first vertex must
    not be repeated as the last. Rings are assumed non-self-intersecting.
    """

    exterior: tuple[GeoPoint, ...]
    holes: tuple[tuple[GeoPoint, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "exterior", tuple(self.exterior))
        object.__setattr__(self, "holes", tuple(tuple(h) for h in self.holes))
        for ring in (self.exterior, *self.holes):
            if len(ring) < 3:
                raise ValueError("polygon ring needs at least 3 vertices")
            if ring[0] == ring[-1]:
                raise ValueError("polygon ring must not repeat the first vertex as last")

    def bbox(self) -> tuple[float, float, float, float]:
        """(min_lon, min_lat, max_lon, max_lat) of the exterior ring."""
        lons = [p.lon for p in self.exterior]
        lats = [p.lat for p in self.exterior]
        return min(lons), min(lats), max(lons), max(lats)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius 6,371,000 m.

    Uses absolute coordinate deltas so that the result is bit-identical under
    argument swap.
    """
    dlat = radians(abs(b.lat - a.lat))
    dlon = radians(abs(b.lon - a.lon))
    lat1 = radians(a.lat)
    lat2 = radians(b.lat)
    h = sin(dlat / 2.0) ** 2 + cos(lat1) * cos(lat2) * sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * asin(min(1.0, sqrt(h)))


def _on_segment(pt: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    cross = (b.lon - a.lon) * (pt.lat - a.lat) - (b.lat - a.lat) * (pt.lon - a.lon)
    if cross != 0.0:
        return False
    return (
        min(a.lon, b.lon) <= pt.lon <= max(a.lon, b.lon)
        and min(a.lat, b.lat) <= pt.lat <= max(a.lat, b.lat)
    )


def _on_ring_boundary(pt: GeoPoint, ring: tuple[GeoPoint, ...]) -> bool:
    prev = ring[-1]
    for cur in ring:
        if _on_segment(pt, prev, cur):
            return True
        prev = cur
    return False


def _ray_cast(pt: GeoPoint, ring: tuple[GeoPoint, ...]) -> bool:
    """Even-odd crossing test against one ring (boundary not handled here)."""
    inside = False
    prev = ring[-1]
    for cur in ring:
        if (cur.lat > pt.lat) != (prev.lat > pt.lat):
            x_int = (prev.lon - cur.lon) * (pt.lat - cur.lat) / (prev.lat - cur.lat) + cur.lon
            if pt.lon < x_int:
                inside = not inside
        prev = cur
    return inside


def point_in_polygon(pt: GeoPoint, poly: GeoPolygon) -> bool:
    """Even-odd containment test. Boundary points count as inside; points
    strictly inside a hole are outside."""
    for ring in (poly.exterior, *poly.holes):
        if _on_ring_boundary(pt, ring):
            return True
    if not _ray_cast(pt, poly.exterior):
        return False
    for hole in poly.holes:
        if _ray_cast(pt, hole):
            return False
    return True


def ring_area_deg2(ring: tuple[GeoPoint, ...]) -> float:
    """Unsigned shoelace area of a ring in square degrees (degeneracy check)."""
    acc = 0.0
    prev = ring[-1]
    for cur in ring:
        acc += prev.lon * cur.lat - cur.lon * prev.lat
        prev = cur
    return abs(acc) / 2.0

"""Independent reference implementations used to check the package under test.

Everything here is deliberately written with different algorithms and data
layouts than the package (dense Floyd-Warshall vs heap Dijkstra, per-row
Python recomputation vs vectorized scan, winding number vs even-odd ray cast)
so agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np


def floyd_warshall(n: int, edges) -> np.ndarray:
    """All-pairs shortest paths via min-plus relaxation over a dense matrix."""
    d = np.full((n, n), np.inf, dtype=np.float64)
    np.fill_diagonal(d, 0.0)
    for u, v, w in edges:
        if w < d[u, v]:
            d[u, v] = w
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def brute_force_best_hub(values, existing, candidates):
    """(best column, cost) by recomputing the objective from scratch per candidate.

    Pure-Python floats, per-row mins, strict less-than over ascending columns.
    """
    rows = len(values)
    ex = sorted(existing)
    best_cost = math.inf
    best_col = None
    for c in sorted(candidates):
        total = 0.0
        for i in range(rows):
            m = min(values[i][q] for q in ex)
            d = values[i][c]
            if d < m:
                m = d
            total += m
        if total < best_cost:
            best_cost = total
            best_col = c
    return best_col, best_cost


def brute_force_cost(values, existing, candidate) -> float:
    rows = len(values)
    ex = sorted(existing)
    total = 0.0
    for i in range(rows):
        total += min(min(values[i][q] for q in ex), values[i][candidate])
    return total


def winding_number(ring, lon: float, lat: float) -> int:
    """Standard winding-number count; nonzero means inside (simple rings)."""
    wn = 0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        if y0 <= lat:
            if y1 > lat and _is_left(x0, y0, x1, y1, lon, lat) > 0:
                wn += 1
        elif y1 <= lat and _is_left(x0, y0, x1, y1, lon, lat) < 0:
            wn -= 1
    return wn


def _is_left(x0, y0, x1, y1, px, py) -> float:
    return (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)


def convex_contains(ring, lon: float, lat: float) -> bool:
    """Half-plane test for a counterclockwise convex ring (boundary counts in)."""
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        if _is_left(x0, y0, x1, y1, lon, lat) < 0:
            return False
    return True


def min_edge_distance(ring, lon: float, lat: float) -> float:
    """Euclidean (degree-space) distance from a point to the ring boundary."""
    best = math.inf
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        dx, dy = x1 - x0, y1 - y0
        L2 = dx * dx + dy * dy
        if L2 == 0:
            t = 0.0
        else:
            t = max(0.0, min(1.0, ((lon - x0) * dx + (lat - y0) * dy) / L2))
        ex, ey = x0 + t * dx - lon, y0 + t * dy - lat
        best = min(best, math.hypot(ex, ey))
    return best


def haversine_reference(lon1, lat1, lon2, lat2, radius=6_371_000.0) -> float:
    """Textbook haversine with atan2, no symmetry tricks."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlmb = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * radius * math.atan2(math.sqrt(a), math.sqrt(1 - a))


def validate_geojson(doc) -> list[str]:
    """Strict structural check of a Point FeatureCollection per RFC 7946.

    Returns a list of problems; empty means valid.
    """
    problems: list[str] = []

    def err(msg):
        problems.append(msg)

    if not isinstance(doc, dict):
        return ["root is not an object"]
    if doc.get("type") != "FeatureCollection":
        err(f"root type {doc.get('type')!r} != FeatureCollection")
    feats = doc.get("features")
    if not isinstance(feats, list):
        return problems + ["features is not an array"]
    for i, feat in enumerate(feats):
        where = f"features[{i}]"
        if not isinstance(feat, dict):
            err(f"{where} not an object")
            continue
        if feat.get("type") != "Feature":
            err(f"{where}.type != Feature")
        if "geometry" not in feat:
            err(f"{where} missing geometry")
            continue
        if "properties" not in feat:
            err(f"{where} missing properties")
        props = feat.get("properties")
        if props is not None and not isinstance(props, dict):
            err(f"{where}.properties not an object/null")
        geom = feat["geometry"]
        if not isinstance(geom, dict):
            err(f"{where}.geometry not an object")
            continue
        if geom.get("type") != "Point":
            err(f"{where}.geometry.type != Point")
            continue
        pos = geom.get("coordinates")
        if (
            not isinstance(pos, list)
            or len(pos) not in (2, 3)
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in pos)
        ):
            err(f"{where}: coordinates must be [lon, lat(, alt)] numbers")
            continue
        if not all(math.isfinite(c) for c in pos):
            err(f"{where}: non-finite coordinate")
        if not (-180.0 <= pos[0] <= 180.0 and -90.0 <= pos[1] <= 90.0):
            err(f"{where}: lon/lat out of range: {pos}")
    return problems

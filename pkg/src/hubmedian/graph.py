"""Directed road network with geo-referenced nodes: CSV load/save and snapping.

File contracts:
  nodes CSV: header exactly ``node_id,lon,lat``
  edges CSV: header exactly ``from_id,to_id,length_m,oneway`` (oneway 0/1;
  oneway=0 rows are materialized as two directed edges)
"""

from __future__ import annotations

import csv
import hashlib
import math
from typing import Iterable, Sequence

import numpy as np

from ._fileio import TextSource, open_text_read, open_text_write, source_name
from .errors import InputError
from .geo import EARTH_RADIUS_M, GeoPoint

# A node reference is a plain index into RoadGraph.positions.
NodeRef = int

NODES_HEADER = ["node_id", "lon", "lat"]
EDGES_HEADER = ["from_id", "to_id", "length_m", "oneway"]


class RoadGraph:
    """Immutable directed graph over geo-referenced nodes, weights in meters."""

    def __init__(
        self,
        node_ids: Sequence[str],
        positions: Sequence[GeoPoint],
        edges: Iterable[tuple[int, int, float]],
    ):
        if len(node_ids) != len(positions):
            raise InputError("node_ids and positions must have equal length")
        if len(set(node_ids)) != len(node_ids):
            raise InputError("node_id values must be unique")
        self.node_ids: list[str] = list(node_ids)
        self.positions: list[GeoPoint] = list(positions)
        self.edges: list[tuple[int, int, float]] = []
        n = len(self.node_ids)
        self.out_adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) references an invalid node index")
            if not (math.isfinite(w) and w > 0):
                raise InputError(f"non-positive edge length on edge ({u}, {v}): {w}")
            self.edges.append((u, v, float(w)))
            self.out_adj[u].append((v, float(w)))
        self._lon_rad = np.radians(np.array([p.lon for p in self.positions], dtype=np.float64))
        self._lat_rad = np.radians(np.array([p.lat for p in self.positions], dtype=np.float64))
        self._cos_lat = np.cos(self._lat_rad)
        self._id_index = {nid: i for i, nid in enumerate(self.node_ids)}
        self._fingerprint: str | None = None

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def total_edge_length(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def reversed(self) -> "RoadGraph":
        """New graph with every edge direction flipped."""
        return RoadGraph(self.node_ids, self.positions, [(v, u, w) for u, v, w in self.edges])

    def fingerprint(self) -> str:
        """Content hash used to detect stale prebuilt indexes."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for nid, p in zip(self.node_ids, self.positions):
                h.update(f"{nid}\t{p.lon!r}\t{p.lat!r}\n".encode())
            for u, v, w in self.edges:
                h.update(f"{u}\t{v}\t{w!r}\n".encode())
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    def index_of(self, node_id: str) -> int:
        try:
            return self._id_index[node_id]
        except KeyError:
            raise InputError(f"unknown node_id {node_id!r}") from None


def _check_header(row: list[str] | None, expected: list[str], name: str) -> None:
    if row != expected:
        raise InputError(
            f"{name}: expected header {','.join(expected)!r}, got "
            f"{','.join(row) if row else '<empty file>'!r}"
        )


def load_graph(nodes_source: TextSource, edges_source: TextSource) -> RoadGraph:
    """Build a RoadGraph from nodes/edges CSV sources. Node order = file order."""
    node_ids: list[str] = []
    positions: list[GeoPoint] = []
    index: dict[str, int] = {}
    with open_text_read(nodes_source) as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), NODES_HEADER, source_name(nodes_source))
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputError(f"nodes line {line_no}: expected 3 fields, got {len(row)}")
            nid, lon_s, lat_s = row
            if nid in index:
                raise InputError(f"duplicate node_id {nid!r} at line {line_no}")
            try:
                pt = GeoPoint(float(lon_s), float(lat_s))
            except ValueError as exc:
                raise InputError(f"nodes line {line_no}: {exc}") from None
            index[nid] = len(node_ids)
            node_ids.append(nid)
            positions.append(pt)

    edges: list[tuple[int, int, float]] = []
    with open_text_read(edges_source) as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), EDGES_HEADER, source_name(edges_source))
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InputError(f"edges line {line_no}: expected 4 fields, got {len(row)}")
            from_s, to_s, length_s, oneway_s = row
            for nid in (from_s, to_s):
                if nid not in index:
                    raise InputError(f"edge at line {line_no} references unknown node_id {nid!r}")
            try:
                length = float(length_s)
            except ValueError:
                raise InputError(f"edges line {line_no}: bad length_m {length_s!r}") from None
            if not (math.isfinite(length) and length > 0):
                raise InputError(f"non-positive edge length at line {line_no}: {length_s}")
            if oneway_s not in ("0", "1"):
                raise InputError(f"edges line {line_no}: oneway must be 0 or 1, got {oneway_s!r}")
            u, v = index[from_s], index[to_s]
            edges.append((u, v, length))
            if oneway_s == "0":
                edges.append((v, u, length))
    return RoadGraph(node_ids, positions, edges)


def save_graph(graph: RoadGraph, nodes_sink: TextSource, edges_sink: TextSource) -> None:
    """Write the graph back out in canonical directed form (every row oneway=1)."""
    with open_text_write(nodes_sink) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NODES_HEADER)
        for nid, p in zip(graph.node_ids, graph.positions):
            w.writerow([nid, repr(p.lon), repr(p.lat)])
    with open_text_write(edges_sink) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGES_HEADER)
        for u, v, length in graph.edges:
            w.writerow([graph.node_ids[u], graph.node_ids[v], repr(length), "1"])


def _haversine_to_all(graph: RoadGraph, pt: GeoPoint) -> np.ndarray:
    """Vectorized great-circle distance from pt to every node, meters.

    Mirrors geo.haversine_m (absolute deltas, same sphere radius) so scalar
    and vectorized paths agree.
    """
    lon0 = math.radians(pt.lon)
    lat0 = math.radians(pt.lat)
    dlat = np.abs(graph._lat_rad - lat0)
    dlon = np.abs(graph._lon_rad - lon0)
    h = np.sin(dlat / 2.0) ** 2 + math.cos(lat0) * graph._cos_lat * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def snap_to_node(graph: RoadGraph, pt: GeoPoint) -> tuple[NodeRef, float]:
    """Nearest node to pt by great-circle distance; ties go to the lowest index."""
    if graph.node_count == 0:
        raise InputError("cannot snap to an empty graph")
    d = _haversine_to_all(graph, pt)
    idx = int(np.argmin(d))
    return idx, float(d[idx])


def snap_many(graph: RoadGraph, points: Sequence[GeoPoint]) -> tuple[np.ndarray, np.ndarray]:
    """Snap a batch of points; returns (node indices, snap distances in meters)."""
    if graph.node_count == 0:
        raise InputError("cannot snap to an empty graph")
    idxs = np.empty(len(points), dtype=np.int64)
    dists = np.empty(len(points), dtype=np.float64)
    for i, pt in enumerate(points):
        d = _haversine_to_all(graph, pt)
        j = int(np.argmin(d))
        idxs[i] = j
        dists[i] = d[j]
    return idxs, dists

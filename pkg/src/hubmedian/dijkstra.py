"""Exact shortest-path distances over the road graph (one source, many targets)."""

from __future__ import annotations

import heapq
from math import inf
from typing import Iterable

from .errors import InputError
from .graph import NodeRef, RoadGraph


def _check_ref(graph: RoadGraph, ref: int, what: str) -> None:
    if not (0 <= ref < graph.node_count):
        raise InputError(f"{what} node index {ref} out of range [0, {graph.node_count})")


def dijkstra_one_to_many(
    graph: RoadGraph, source: NodeRef, targets: Iterable[NodeRef]
) -> dict[NodeRef, float]:
    """Shortest-path distance in meters from source to each target.

    Unreachable targets map to +inf. Stops early once every target is settled.
    """
    _check_ref(graph, source, "source")
    pending = set(targets)
    for t in pending:
        _check_ref(graph, t, "target")
    out: dict[NodeRef, float] = {}
    dist: dict[NodeRef, float] = {source: 0.0}
    settled: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, source)]
    adj = graph.out_adj
    while heap and pending:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        if u in pending:
            out[u] = d
            pending.discard(u)
            if not pending:
                break
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    for t in pending:
        out[t] = inf
    return out

"""Contraction hierarchies: witness-checked shortcuts plus bidirectional upward queries.

Preprocessing contracts nodes in priority order (edge difference plus count of
already-contracted neighbors, updated lazily). Removing a node inserts a
shortcut between each in/out neighbor pair unless a bounded witness search
proves an equal-or-shorter detour exists. An exhausted witness budget inserts
the shortcut anyway: over-insertion costs space, never correctness.

Queries run two upward Dijkstra searches (forward from the source, backward
from the target along reversed downward edges) and minimize over meeting
nodes; results equal plain Dijkstra on the original graph.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from math import inf
from typing import Sequence

import numpy as np

from .errors import InputError, StaleIndexError
from .graph import NodeRef, RoadGraph


@dataclass
class CHIndex:
    """Query-ready hierarchy: contraction ranks and upward/downward adjacency."""

    node_count: int
    rank: list[int]
    up: list[list[tuple[int, float]]]
    down: list[list[tuple[int, float]]]
    shortcuts: dict[tuple[int, int], float] = field(repr=False)
    graph_fingerprint: str = ""

    @property
    def shortcut_count(self) -> int:
        return len(self.shortcuts)

    def check_graph(self, graph: RoadGraph) -> None:
        if graph.fingerprint() != self.graph_fingerprint:
            raise StaleIndexError("contraction index was built for a different graph")

    def query(self, source: NodeRef, target: NodeRef) -> float:
        return ch_query(self, source, target)


class _Builder:
    def __init__(self, graph: RoadGraph, witness_settle_limit: int):
        n = graph.node_count
        self.n = n
        self.limit = witness_settle_limit
        # Min-collapsed working adjacency; grows as shortcuts are inserted.
        self.out_: list[dict[int, float]] = [{} for _ in range(n)]
        self.in_: list[dict[int, float]] = [{} for _ in range(n)]
        for u, v, w in graph.edges:
            if u == v:
                continue  # positive-weight self loops never shorten a path
            if w < self.out_[u].get(v, inf):
                self.out_[u][v] = w
                self.in_[v][u] = w
        self.contracted = [False] * n
        self.rank = [0] * n
        self.deleted_neighbors = [0] * n
        self.shortcuts: dict[tuple[int, int], float] = {}

    def _witness_search(
        self, source: int, targets: set[int], excluded: int, cutoff: float
    ) -> dict[int, float]:
        """Distances from source settled within budget/cutoff, avoiding `excluded`."""
        dist = {source: 0.0}
        found: dict[int, float] = {}
        remaining = set(targets)
        settled: set[int] = set()
        heap = [(0.0, source)]
        while heap:
            d, x = heapq.heappop(heap)
            if d > cutoff:
                break
            if x in settled:
                continue
            settled.add(x)
            if x in remaining:
                found[x] = d
                remaining.discard(x)
                if not remaining:
                    break
            if len(settled) >= self.limit:
                break
            for y, w in self.out_[x].items():
                if y == excluded or self.contracted[y]:
                    continue
                nd = d + w
                if nd <= cutoff and nd < dist.get(y, inf):
                    dist[y] = nd
                    heapq.heappush(heap, (nd, y))
        return found

    def _needed_shortcuts(self, v: int) -> list[tuple[int, int, float]]:
        """Shortcut candidates (u, w, length) that lack a witness path around v."""
        in_nbrs = sorted((u, w) for u, w in self.in_[v].items() if not self.contracted[u])
        out_nbrs = sorted((x, w) for x, w in self.out_[v].items() if not self.contracted[x])
        needed: list[tuple[int, int, float]] = []
        for u, w_uv in in_nbrs:
            targets = {x for x, _ in out_nbrs if x != u}
            if not targets:
                continue
            cutoff = w_uv + max(w for x, w in out_nbrs if x != u)
            witness = self._witness_search(u, targets, v, cutoff)
            for x, w_vx in out_nbrs:
                if x == u:
                    continue
                via = w_uv + w_vx
                if witness.get(x, inf) <= via:
                    continue
                needed.append((u, x, via))
        return needed

    def _edges_removed(self, v: int) -> int:
        return sum(1 for u in self.in_[v] if not self.contracted[u]) + sum(
            1 for x in self.out_[v] if not self.contracted[x]
        )

    def _apply(self, v: int, needed: list[tuple[int, int, float]], rank_pos: int) -> None:
        for u, x, via in needed:
            if via < self.out_[u].get(x, inf):
                self.out_[u][x] = via
                self.in_[x][u] = via
                self.shortcuts[(u, x)] = via
        self.contracted[v] = True
        self.rank[v] = rank_pos
        for nb in set(self.in_[v]) | set(self.out_[v]):
            if not self.contracted[nb]:
                self.deleted_neighbors[nb] += 1

    def run(self, order: Sequence[int] | None) -> None:
        if order is not None:
            if sorted(order) != list(range(self.n)):
                raise InputError("contraction order must be a permutation of all node indices")
            for rank_pos, v in enumerate(order):
                self._apply(v, self._needed_shortcuts(v), rank_pos)
            return
        heap = []
        for v in range(self.n):
            prio = len(self._needed_shortcuts(v)) - self._edges_removed(v)
            heap.append((prio, v))
        heapq.heapify(heap)
        next_rank = 0
        while heap:
            _, v = heapq.heappop(heap)
            if self.contracted[v]:
                continue
            needed = self._needed_shortcuts(v)
            prio = len(needed) - self._edges_removed(v) + self.deleted_neighbors[v]
            if heap and prio > heap[0][0]:
                heapq.heappush(heap, (prio, v))
                continue
            self._apply(v, needed, next_rank)
            next_rank += 1


def build_ch(
    graph: RoadGraph,
    *,
    witness_settle_limit: int = 500,
    order: Sequence[int] | None = None,
) -> CHIndex:
    """Preprocess the graph into a query-exact contraction hierarchy.

    `order` overrides the priority heuristic with an explicit contraction
    sequence (a permutation of node indices); exactness holds for any order.
    """
    builder = _Builder(graph, witness_settle_limit)
    builder.run(order)
    n = graph.node_count
    rank = builder.rank
    up: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    down: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u in range(n):
        for x, w in builder.out_[u].items():
            if rank[x] > rank[u]:
                up[u].append((x, w))
            else:
                down[x].append((u, w))
    for lst in up:
        lst.sort()
    for lst in down:
        lst.sort()
    return CHIndex(
        node_count=n,
        rank=list(rank),
        up=up,
        down=down,
        shortcuts=builder.shortcuts,
        graph_fingerprint=graph.fingerprint(),
    )


def _upward_search(adj: list[list[tuple[int, float]]], start: int) -> dict[int, float]:
    dist = {start: 0.0}
    settled: dict[int, float] = {}
    heap = [(0.0, start)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in settled:
            continue
        settled[u] = d
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return settled


def _check_ref(index: CHIndex, ref: int, what: str) -> None:
    if not (0 <= ref < index.node_count):
        raise InputError(f"{what} node index {ref} out of range [0, {index.node_count})")


def ch_query(
    index: CHIndex, source: NodeRef, target: NodeRef, *, graph: RoadGraph | None = None
) -> float:
    """Exact shortest-path distance in meters; +inf when unreachable.

    Passing the graph verifies the index was built for it.
    """
    if graph is not None:
        index.check_graph(graph)
    _check_ref(index, source, "source")
    _check_ref(index, target, "target")
    forward = _upward_search(index.up, source)
    backward = _upward_search(index.down, target)
    if len(backward) < len(forward):
        small, big = backward, forward
    else:
        small, big = forward, backward
    best = inf
    for node, d1 in small.items():
        d2 = big.get(node)
        if d2 is not None and d1 + d2 < best:
            best = d1 + d2
    return best


def ch_many_to_many(
    index: CHIndex, sources: Sequence[NodeRef], targets: Sequence[NodeRef]
) -> np.ndarray:
    """Exact distance table sources × targets via target-bucketed upward searches."""
    for s in sources:
        _check_ref(index, s, "source")
    buckets: dict[int, list[tuple[int, float]]] = {}
    for ti, t in enumerate(targets):
        _check_ref(index, t, "target")
        for node, d in _upward_search(index.down, t).items():
            buckets.setdefault(node, []).append((ti, d))
    out = np.full((len(sources), len(targets)), np.inf, dtype=np.float64)
    for si, s in enumerate(sources):
        row = out[si]
        for node, df in _upward_search(index.up, s).items():
            hits = buckets.get(node)
            if hits:
                for ti, db in hits:
                    total = df + db
                    if total < row[ti]:
                        row[ti] = total
    return out

"""Conditional 1-median over a precomputed distance matrix.

Given existing hub columns Q and candidate columns, find the candidate p
minimizing F(p) = sum over deliveries i of min(b_i, D[i][p]), where
b_i = min over q in Q of D[i][q]. The scan is exhaustive: b is computed once,
then each candidate costs one fused min-sum pass over the delivery axis, so
the whole scan is O(deliveries x candidates). Ties break to the lowest column
index (first seen under a strict less-than comparison in ascending order).

Unreachable entries are +inf and never improve a minimum; a candidate with
unreachable deliveries is scanned, not skipped. Only when no candidate yields
a finite total is the instance infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, InputError
from .matrix import DistanceMatrix

# Candidate columns are scanned in slabs this wide to bound the temporary
# min() buffer while keeping the work vectorized.
_CHUNK = 128


@dataclass(frozen=True)
class HubScenario:
    """Immutable solve instance: matrix plus disjoint existing/candidate columns."""

    matrix: DistanceMatrix
    existing: frozenset[int]
    candidates: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "existing", frozenset(self.existing))
        object.__setattr__(self, "candidates", frozenset(self.candidates))
        k = self.matrix.col_count
        for col in self.existing | self.candidates:
            if not (0 <= col < k):
                raise InputError(f"column index {col} out of range [0, {k})")
        if not self.existing:
            raise InputError("existing hub set is empty")
        if self.existing & self.candidates:
            both = sorted(self.existing & self.candidates)
            raise InputError(f"columns {both} are both existing and candidate")


@dataclass(frozen=True)
class SolveResult:
    """Winning candidate plus the re-clustered assignment for existing + winner."""

    best_hub_column: int
    min_cost: float
    baseline_cost: float
    assigned_columns: np.ndarray = field(repr=False)
    assigned_meters: np.ndarray = field(repr=False)
    cluster_sizes: dict[int, int]
    candidate_costs: dict[int, float] = field(repr=False)

    @property
    def delivery_count(self) -> int:
        return len(self.assigned_columns)


def best_existing_distances(scenario: HubScenario) -> np.ndarray:
    """b_i = distance from delivery i to its nearest existing hub (may be +inf)."""
    cols = sorted(scenario.existing)
    return scenario.matrix.values[:, cols].min(axis=1)


def evaluate_cost(scenario: HubScenario, candidate: int) -> float:
    """F(candidate) against the precomputed nearest-existing vector."""
    _check_candidate(scenario, candidate)
    b = best_existing_distances(scenario)
    col = scenario.matrix.values[:, candidate]
    return float(np.minimum(b, col).sum())


def _check_candidate(scenario: HubScenario, candidate: int) -> None:
    if candidate in scenario.existing:
        raise InputError(f"column {candidate} is an existing hub, not a candidate")
    if not (0 <= candidate < scenario.matrix.col_count):
        raise InputError(
            f"candidate column {candidate} out of range [0, {scenario.matrix.col_count})"
        )


def _unreachable_ids(scenario: HubScenario, b: np.ndarray, cand_cols: list[int]) -> list[str]:
    vals = scenario.matrix.values
    dead = np.isinf(b) & np.isinf(vals[:, cand_cols]).all(axis=1)
    if not dead.any():
        # No single row blocks every candidate, but each candidate is blocked
        # by some row: report every row that blocks at least one candidate.
        dead = np.isinf(b) & np.isinf(vals[:, cand_cols]).any(axis=1)
    return [scenario.matrix.row_labels[i] for i in np.flatnonzero(dead)]


def solve_conditional_1median(scenario: HubScenario) -> SolveResult:
    """Exhaustive candidate scan; ties go to the lowest column index."""
    if not scenario.candidates:
        raise InputError("no candidate columns to scan")
    vals = scenario.matrix.values
    b = best_existing_distances(scenario)
    cand_cols = sorted(scenario.candidates)
    costs = np.empty(len(cand_cols), dtype=np.float64)
    for start in range(0, len(cand_cols), _CHUNK):
        chunk = cand_cols[start : start + _CHUNK]
        costs[start : start + len(chunk)] = np.minimum(b[:, None], vals[:, chunk]).sum(axis=0)
    best_pos = int(np.argmin(costs))
    min_cost = float(costs[best_pos])
    if np.isinf(min_cost):
        ids = _unreachable_ids(scenario, b, cand_cols)
        raise InfeasibleError(
            "every candidate leaves at least one delivery unreachable by all hubs",
            delivery_ids=ids,
        )
    best_col = cand_cols[best_pos]
    baseline = float(b.sum())
    hub_set = scenario.existing | {best_col}
    assigned_cols, assigned_m = assign_nearest(scenario.matrix, hub_set)
    sizes = {col: 0 for col in sorted(hub_set)}
    uniq, counts = np.unique(assigned_cols, return_counts=True)
    for col, cnt in zip(uniq, counts):
        sizes[int(col)] = int(cnt)
    return SolveResult(
        best_hub_column=best_col,
        min_cost=min_cost,
        baseline_cost=baseline,
        assigned_columns=assigned_cols,
        assigned_meters=assigned_m,
        cluster_sizes=sizes,
        candidate_costs={col: float(c) for col, c in zip(cand_cols, costs)},
    )


def assign_nearest(matrix: DistanceMatrix, hubs: set[int]) -> tuple[np.ndarray, np.ndarray]:
    """Per delivery: (nearest hub column, meters); ties go to the lowest column."""
    if not hubs:
        raise InputError("hub set is empty")
    cols = sorted(hubs)
    for col in cols:
        if not (0 <= col < matrix.col_count):
            raise InputError(f"column index {col} out of range [0, {matrix.col_count})")
    sub = matrix.values[:, cols]
    pos = np.argmin(sub, axis=1)
    dist = sub[np.arange(sub.shape[0]), pos]
    if np.isinf(dist).any():
        ids = [matrix.row_labels[i] for i in np.flatnonzero(np.isinf(dist))]
        raise InfeasibleError(
            "deliveries unreachable from every hub in the set", delivery_ids=ids
        )
    return np.asarray(cols, dtype=np.int64)[pos], dist.astype(np.float64, copy=True)


def relocate(scenario: HubScenario, keep: set[int], pool: set[int]) -> SolveResult:
    """Re-site one hub: solve with `keep` fixed and `pool` as candidates.

    `keep` must drop exactly one existing hub; `pool` may include the dropped
    hub's own column, so "stay put" is a legal answer.
    """
    keep_set = frozenset(keep)
    pool_set = frozenset(pool)
    if not keep_set:
        raise InputError("cannot relocate the only hub: at least one must stay fixed")
    if not keep_set < scenario.existing:
        raise InputError("keep must be a proper subset of the existing hubs")
    if len(keep_set) != len(scenario.existing) - 1:
        raise InputError(
            f"keep must drop exactly one hub: {len(keep_set)} kept of {len(scenario.existing)}"
        )
    removed = scenario.existing - keep_set
    allowed = scenario.candidates | removed
    if not pool_set:
        raise InputError("relocation pool is empty")
    if not pool_set <= allowed:
        bad = sorted(pool_set - allowed)
        raise InputError(f"pool columns {bad} are neither candidates nor the removed hub")
    return solve_conditional_1median(HubScenario(scenario.matrix, keep_set, pool_set))

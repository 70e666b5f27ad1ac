"""Dense delivery × hub road-distance matrix: construction and CSV persistence."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from ._fileio import TextSource, open_text_read, open_text_write
from .ch import CHIndex, ch_many_to_many
from .dijkstra import dijkstra_one_to_many
from .errors import InputError
from .graph import NodeRef, RoadGraph

ENGINES = ("dijkstra", "ch")
DIRECTIONS = ("hub-to-delivery", "delivery-to-hub")

_LABEL_FORBIDDEN = set(',"\r\n')


def _check_labels(labels: Sequence[str], what: str) -> tuple[str, ...]:
    seen = set()
    for lab in labels:
        if not lab:
            raise InputError(f"empty {what} label")
        if _LABEL_FORBIDDEN & set(lab):
            raise InputError(f"{what} label {lab!r} contains a comma, quote, or newline")
        if lab in seen:
            raise InputError(f"duplicate {what} label {lab!r}")
        seen.add(lab)
    return tuple(labels)


@dataclass(frozen=True)
class DistanceMatrix:
    """Meters from hub column j to delivery row i; +inf marks unreachable pairs.

    Immutable after construction and safe to share across threads.
    """

    values: np.ndarray
    row_labels: tuple[str, ...]
    column_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise InputError(f"matrix values must be 2-dimensional, got shape {vals.shape}")
        rows = _check_labels(self.row_labels, "delivery")
        cols = _check_labels(self.column_labels, "hub")
        if vals.shape != (len(rows), len(cols)):
            raise InputError(
                f"matrix shape {vals.shape} does not match "
                f"{len(rows)} delivery and {len(cols)} hub labels"
            )
        if np.isnan(vals).any():
            raise InputError("matrix contains NaN entries")
        if (vals < 0).any():
            raise InputError("matrix contains negative distances")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "column_labels", cols)

    @property
    def row_count(self) -> int:
        return self.values.shape[0]

    @property
    def col_count(self) -> int:
        return self.values.shape[1]

    def column_index(self, label: str) -> int:
        try:
            return self.column_labels.index(label)
        except ValueError:
            raise InputError(f"unknown hub column {label!r}") from None


def build_distance_matrix(
    graph: RoadGraph,
    deliveries: Sequence[NodeRef],
    hubs: Sequence[NodeRef],
    engine: str = "dijkstra",
    *,
    direction: str = "hub-to-delivery",
    ch_index: CHIndex | None = None,
    row_labels: Sequence[str] | None = None,
    column_labels: Sequence[str] | None = None,
    threads: int = 1,
) -> DistanceMatrix:
    """One shortest-path search per hub column; values[i][j] = d(hub j, delivery i).

    `direction` flips which endpoint acts as search source on one-way-rich
    graphs; `ch_index` reuses a prebuilt hierarchy for engine="ch". Output is
    independent of `threads` (each worker fills whole columns).
    """
    if engine not in ENGINES:
        raise InputError(f"engine must be one of {ENGINES}, got {engine!r}")
    if direction not in DIRECTIONS:
        raise InputError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if not deliveries or not hubs:
        raise InputError("deliveries and hubs must both be non-empty")
    if threads < 1:
        raise InputError("threads must be >= 1")
    if row_labels is None:
        row_labels = [f"d{i}" for i in range(len(deliveries))]
    if column_labels is None:
        column_labels = [f"h{j}" for j in range(len(hubs))]

    if engine == "ch":
        if ch_index is None:
            from .ch import build_ch

            ch_index = build_ch(graph)
        else:
            ch_index.check_graph(graph)
        if direction == "hub-to-delivery":
            values = ch_many_to_many(ch_index, hubs, deliveries).T.copy()
        else:
            values = ch_many_to_many(ch_index, deliveries, hubs)
        return DistanceMatrix(values, row_labels, column_labels)

    search_graph = graph if direction == "hub-to-delivery" else graph.reversed()
    target_set = set(deliveries)
    values = np.full((len(deliveries), len(hubs)), np.inf, dtype=np.float64)

    def fill_column(j: int) -> None:
        dist = dijkstra_one_to_many(search_graph, hubs[j], target_set)
        col = values[:, j]
        for i, node in enumerate(deliveries):
            col[i] = dist[node]

    if threads == 1:
        for j in range(len(hubs)):
            fill_column(j)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_column, range(len(hubs))))
    return DistanceMatrix(values, row_labels, column_labels)


def save_matrix(matrix: DistanceMatrix, sink: TextSource) -> None:
    """CSV with header `delivery_id,<hub ids>`; +inf saved as an empty cell."""
    with open_text_write(sink) as f:
        f.write(",".join(("delivery_id", *matrix.column_labels)) + "\n")
        vals = matrix.values
        body = pd.DataFrame(np.where(np.isfinite(vals), vals, np.nan))
        body.insert(0, "delivery_id", list(matrix.row_labels))
        body.to_csv(f, index=False, header=False, float_format="%.17g", na_rep="")


def load_matrix(source: TextSource, *, transpose: bool = False) -> DistanceMatrix:
    """Parse a matrix CSV back into deliveries × hubs form.

    With transpose=True the file is read as hubs × deliveries instead: header
    `hub_id,<delivery ids>`, one row per hub, and the grid is transposed on
    load. Empty cells become +inf. Ragged rows and negative cells are rejected
    with their line number.
    """
    with open_text_read(source) as f:
        text = f.read()
    lines = text.splitlines()
    if not lines:
        raise InputError("matrix file is empty")
    first_field = "hub_id" if transpose else "delivery_id"
    header = lines[0].split(",")
    if header[0] != first_field:
        raise InputError(f"matrix header must start with {first_field!r}, got {header[0]!r}")
    file_col_labels = header[1:]
    if not file_col_labels:
        raise InputError("matrix header names no value columns")
    expected = len(header)
    for ln, line in enumerate(lines[1:], start=2):
        found = line.count(",") + 1
        if found != expected:
            raise InputError(f"line {ln}: expected {expected} fields, found {found}")
    if len(lines) == 1:
        raise InputError("matrix has no data rows")

    dtype: dict[int, type] = {0: str}
    for c in range(1, expected):
        dtype[c] = np.float64
    try:
        frame = pd.read_csv(
            io.StringIO("\n".join(lines[1:])),
            header=None,
            dtype=dtype,
            na_values=[""],
            keep_default_na=False,
            float_precision="round_trip",  # default parser is off by an ulp
        )
    except ValueError as exc:
        raise InputError(f"matrix cell is not a number: {exc}") from None
    file_row_labels = [str(v) for v in frame.iloc[:, 0]]
    vals = frame.iloc[:, 1:].to_numpy(dtype=np.float64)
    vals = np.where(np.isnan(vals), np.inf, vals)
    neg = np.argwhere(vals < 0)
    if neg.size:
        r, c = neg[0]
        raise InputError(f"line {int(r) + 2}: negative distance {vals[r, c]} in column {int(c) + 1}")

    if transpose:
        return DistanceMatrix(vals.T.copy(), file_col_labels, file_row_labels)
    return DistanceMatrix(vals, file_row_labels, file_col_labels)

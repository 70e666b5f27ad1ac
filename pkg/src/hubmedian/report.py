"""Evaluation artifacts: per-delivery averages, improvement, histogram, GeoJSON."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .errors import InputError
from .geo import GeoPoint
from .solver import HubScenario, SolveResult, best_existing_distances

HUB_ROLES = ("existing", "new", "relocated", "candidate")


def average_delivery_km(total_cost_m: float, deliveries: int) -> float:
    if deliveries < 1:
        raise InputError(f"delivery count must be >= 1, got {deliveries}")
    return total_cost_m / (1000.0 * deliveries)


def improvement_pct(before_km: float, after_km: float) -> float:
    """Percent reduction 100*(before - after)/before, unrounded.

    Rounding to one decimal happens only at display time. An infinite
    before-average (some delivery unreachable until the new hub) counts as a
    full 100% improvement.
    """
    if not before_km > 0:
        raise InputError(f"before-average must be positive, got {before_km}")
    if math.isinf(before_km):
        if math.isinf(after_km):
            raise InputError("both averages are infinite")
        return 100.0
    return 100.0 * (before_km - after_km) / before_km


@dataclass(frozen=True)
class Histogram:
    """Right-open km bins: underflow [0, origin), then fixed-width bins."""

    edges_km: tuple[float, ...]
    counts: tuple[int, ...]
    modal_range: tuple[float, float] | None


def distance_histogram(
    assignment_meters: Sequence[float] | np.ndarray,
    bin_width_km: float = 2.0,
    origin_km: float = 1.0,
    *,
    last_edge_at_least_km: float = 0.0,
) -> Histogram:
    """Bin per-delivery distances (meters in, km bins).

    Bins are right-open [edge, edge + width) with an underflow bin
    [0, origin); edges always extend strictly past the maximum value (and past
    `last_edge_at_least_km`, which lets two histograms share edges), so the
    notional unbounded overflow bin is empty and omitted. The modal range is
    the lowest bin with the highest count, None for empty input.
    """
    if not (math.isfinite(bin_width_km) and bin_width_km > 0):
        raise InputError(f"bin width must be positive, got {bin_width_km}")
    if not (math.isfinite(origin_km) and origin_km >= 0):
        raise InputError(f"bin origin must be non-negative, got {origin_km}")
    vals_km = np.asarray(assignment_meters, dtype=np.float64) / 1000.0
    if vals_km.size and (not np.isfinite(vals_km).all() or (vals_km < 0).any()):
        raise InputError("distances must be finite and non-negative")
    target = float(max(vals_km.max() if vals_km.size else 0.0, last_edge_at_least_km))
    edges = [0.0, origin_km] if origin_km > 0 else [0.0]
    k = 1
    while edges[-1] <= target:
        edges.append(origin_km + k * bin_width_km)
        k += 1
    counts, _ = np.histogram(vals_km, bins=edges)
    counts_t = tuple(int(c) for c in counts)
    if sum(counts_t) == 0:
        modal = None
    else:
        i = int(np.argmax(counts))
        modal = (edges[i], edges[i + 1])
    return Histogram(tuple(edges), counts_t, modal)


@dataclass(frozen=True)
class MetricsReport:
    avg_before_km: float
    avg_after_km: float
    improvement_pct: float
    total_cost_m: float
    baseline_cost_m: float
    delivery_count: int
    best_hub_label: str
    best_hub_column: int
    cluster_sizes: dict[str, int]
    bin_edges_km: tuple[float, ...] = field(repr=False)
    counts_before: tuple[int, ...] = field(repr=False)
    counts_after: tuple[int, ...] = field(repr=False)
    modal_bin_before: tuple[float, float] | None
    modal_bin_after: tuple[float, float] | None
    solve_runtime_s: float


def build_report(
    scenario: HubScenario,
    result: SolveResult,
    solve_runtime_s: float,
    bin_width_km: float = 2.0,
    origin_km: float = 1.0,
) -> MetricsReport:
    """Aggregate a solve into before/after metrics on shared histogram edges.

    The "before" side is always recomputed from `scenario.existing`, so for a
    relocation the caller passes the original scenario (all q hubs) and the
    comparison runs against the pre-relocation state. The before-histogram
    covers deliveries reachable from those hubs (its counts can fall short of
    delivery_count when the baseline had +inf rows); the after-histogram
    always sums to delivery_count.
    """
    matrix = scenario.matrix
    a = matrix.row_count
    b = best_existing_distances(scenario)
    before_finite = b[np.isfinite(b)]
    after = result.assigned_meters
    baseline_cost = float(b.sum())
    avg_before = average_delivery_km(baseline_cost, a)
    avg_after = average_delivery_km(result.min_cost, a)
    shared_max = float(
        max(
            before_finite.max() / 1000.0 if before_finite.size else 0.0,
            after.max() / 1000.0,
        )
    )
    hist_before = distance_histogram(
        before_finite, bin_width_km, origin_km, last_edge_at_least_km=shared_max
    )
    hist_after = distance_histogram(
        after, bin_width_km, origin_km, last_edge_at_least_km=shared_max
    )
    return MetricsReport(
        avg_before_km=avg_before,
        avg_after_km=avg_after,
        improvement_pct=improvement_pct(avg_before, avg_after),
        total_cost_m=result.min_cost,
        baseline_cost_m=baseline_cost,
        delivery_count=a,
        best_hub_label=matrix.column_labels[result.best_hub_column],
        best_hub_column=result.best_hub_column,
        cluster_sizes={
            matrix.column_labels[col]: n for col, n in sorted(result.cluster_sizes.items())
        },
        bin_edges_km=hist_before.edges_km,
        counts_before=hist_before.counts,
        counts_after=hist_after.counts,
        modal_bin_before=hist_before.modal_range,
        modal_bin_after=hist_after.modal_range,
        solve_runtime_s=solve_runtime_s,
    )


def write_report(report: MetricsReport, sink: str | Path | IO[str]) -> None:
    """Serialize the report as JSON with snake_case fields, km/m as named."""
    doc = asdict(report)
    doc["bin_edges_km"] = list(report.bin_edges_km)
    doc["counts_before"] = list(report.counts_before)
    doc["counts_after"] = list(report.counts_after)
    doc["modal_bin_before"] = list(report.modal_bin_before) if report.modal_bin_before else None
    doc["modal_bin_after"] = list(report.modal_bin_after) if report.modal_bin_after else None
    if hasattr(sink, "write"):
        json.dump(doc, sink, indent=2)
        sink.write("\n")
    else:
        with open(sink, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


def _point_feature(pt: GeoPoint, properties: dict) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [pt.lon, pt.lat]},
        "properties": properties,
    }


def _write_collection(features: list[dict], path: Path) -> None:
    doc = {"type": "FeatureCollection", "features": features}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def export_geojson(
    *,
    hubs: Sequence[tuple[str, GeoPoint, str]],
    out_dir: str | Path,
    candidates: Sequence[tuple[str, GeoPoint, str, float]] | None = None,
    demand: Sequence[tuple[str, GeoPoint, str, float]] | None = None,
) -> dict[str, Path]:
    """Write one Point FeatureCollection file per layer; returns {layer: path}.

    hubs: (label, point, role) with role in HUB_ROLES -> hubs.geojson.
    candidates: (candidate_id, point, node_id, snap_m) -> candidates.geojson,
    each with role "candidate".
    demand: (delivery_id, point, assigned_hub, distance_m) -> demand.geojson.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    if not hubs:
        raise InputError("no hub features to export")
    hub_features = []
    for label, pt, role in hubs:
        if role not in HUB_ROLES:
            raise InputError(f"hub role must be one of {HUB_ROLES}, got {role!r}")
        hub_features.append(_point_feature(pt, {"label": label, "role": role}))
    path = out / "hubs.geojson"
    _write_collection(hub_features, path)
    written["hubs"] = path

    if candidates is not None:
        feats = [
            _point_feature(
                pt,
                {
                    "candidate_id": cid,
                    "node_id": node_id,
                    "snap_m": float(snap_m),
                    "role": "candidate",
                },
            )
            for cid, pt, node_id, snap_m in candidates
        ]
        path = out / "candidates.geojson"
        _write_collection(feats, path)
        written["candidates"] = path

    if demand is not None:
        feats = [
            _point_feature(
                pt,
                {
                    "delivery_id": did,
                    "assigned_hub": hub_label,
                    "distance_m": float(meters),
                },
            )
            for did, pt, hub_label, meters in demand
        ]
        path = out / "demand.geojson"
        _write_collection(feats, path)
        written["demand"] = path

    return written

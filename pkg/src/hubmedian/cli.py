"""Command-line pipeline: scenario generation, matrix construction, solve, report.

Subcommands write their data files into the --out directory (created if
missing) plus a run.json recording the parsed configuration, seed, package
version, and the wall-clock duration of the candidate scan where one ran.
Warnings go to stderr; stdout carries a one-line summary per command.

Exit codes: 0 success, 2 usage or input error, 3 infeasible instance.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from ._fileio import open_text_read, source_name
from .candidates import (
    CANDIDATES_HEADER,
    generate_grid,
    load_candidates,
    load_region,
    save_candidates,
    snap_candidates,
)
from .demand import (
    DEMAND_HEADER,
    WeightedRegion,
    generate_population_demand,
    load_deliveries,
    load_region_weights,
    sample_demand,
    save_demand,
    scale_weights,
)
from .errors import InfeasibleError, InputError, StaleIndexError
from .geo import GeoPoint
from .graph import load_graph, snap_to_node
from .matrix import DIRECTIONS, ENGINES, DistanceMatrix, build_distance_matrix, load_matrix, save_matrix
from .report import build_report, export_geojson, write_report
from .solver import HubScenario, relocate, solve_conditional_1median

log = logging.getLogger(__name__)

# Existing hubs given as coordinates snapping farther than this draw a warning.
HUB_SNAP_WARN_M = 500.0


def _parse_existing_item(item: str) -> tuple[str, str | GeoPoint]:
    if item.startswith("col:"):
        label = item[len("col:") :]
        if not label:
            raise InputError("empty column id in --existing col:")
        return "col", label
    parts = item.split(",")
    if len(parts) != 2:
        raise InputError(f"--existing expects 'lon,lat' or 'col:<id>', got {item!r}")
    try:
        return "coord", GeoPoint(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise InputError(f"--existing {item!r}: {exc}") from None


def _require(args: argparse.Namespace, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n.lstrip("-").replace("-", "_")) is None]
    if missing:
        raise InputError(f"{args.subcommand}: missing required flag(s) {', '.join(missing)}")


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run(out: Path, args: argparse.Namespace, solve_runtime_s: float | None) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
    doc = {
        "subcommand": args.subcommand,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "solve_runtime_s": solve_runtime_s,
    }
    with open(out / "run.json", "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def _read_candidate_coords(path: str) -> list[tuple[str, GeoPoint, str, float]]:
    """Candidate CSV rows as (id, point, node_id, snap_m), no graph needed."""
    rows: list[tuple[str, GeoPoint, str, float]] = []
    with open_text_read(path) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CANDIDATES_HEADER:
            raise InputError(
                f"{source_name(path)}: expected header {','.join(CANDIDATES_HEADER)!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise InputError(
                    f"{source_name(path)} line {line_no}: expected 5 fields, found {len(row)}"
                )
            try:
                rows.append((row[0], GeoPoint(float(row[1]), float(row[2])), row[3], float(row[4])))
            except ValueError as exc:
                raise InputError(f"{source_name(path)} line {line_no}: {exc}") from None
    return rows


def _read_demand_coords(path: str) -> list[tuple[str, GeoPoint]]:
    rows: list[tuple[str, GeoPoint]] = []
    with open_text_read(path) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != DEMAND_HEADER:
            raise InputError(f"{source_name(path)}: expected header {','.join(DEMAND_HEADER)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InputError(
                    f"{source_name(path)} line {line_no}: expected 3 fields, found {len(row)}"
                )
            try:
                rows.append((row[0], GeoPoint(float(row[1]), float(row[2]))))
            except ValueError as exc:
                raise InputError(f"{source_name(path)} line {line_no}: {exc}") from None
    return rows


def cmd_gen_candidates(args: argparse.Namespace) -> None:
    _require(args, ["--graph-nodes", "--graph-edges", "--region"])
    out = _out_dir(args)
    graph = load_graph(args.graph_nodes, args.graph_edges)
    region = load_region(args.region)
    lattice = generate_grid(region, args.spacing_m)
    cset = snap_candidates(graph, lattice, max_snap_m=args.spacing_m / 2.0, spacing_m=args.spacing_m)
    path = out / "candidates.csv"
    save_candidates(cset, path)
    _write_run(out, args, None)
    print(f"wrote {len(cset)} candidates ({len(lattice)} lattice points) to {path}")


def cmd_gen_demand(args: argparse.Namespace) -> None:
    _require(args, ["--graph-nodes", "--graph-edges"])
    if args.deliveries and args.population:
        raise InputError("--deliveries and --population are mutually exclusive")
    if not args.deliveries and not args.population:
        raise InputError("gen-demand needs --deliveries or --population")
    out = _out_dir(args)
    graph = load_graph(args.graph_nodes, args.graph_edges)
    if args.deliveries:
        if args.total is not None:
            raise InputError("--total applies to --population only; use --sample")
        demand = load_deliveries(args.deliveries, graph)
        if args.sample is not None:
            if args.seed is None:
                raise InputError("--sample requires --seed")
            demand = sample_demand(demand, args.sample, args.seed)
    else:
        if args.sample is not None:
            raise InputError("--sample applies to --deliveries only; use --total")
        if args.total is None:
            raise InputError("--population requires --total")
        if args.seed is None:
            raise InputError("--population requires --seed")
        raw = load_region_weights(args.population)
        scaled = scale_weights([(name, pop) for name, _, pop in raw], args.total)
        regions = [
            WeightedRegion(name, poly, count)
            for (name, poly, _), (_, count) in zip(raw, scaled)
        ]
        demand = generate_population_demand(regions, graph, args.seed)
    path = out / "demand.csv"
    save_demand(demand, path)
    _write_run(out, args, None)
    print(f"wrote {len(demand)} demand points to {path}")


def _snap_existing_coords(graph, coords: list[GeoPoint]) -> tuple[list[int], list[str]]:
    nodes: list[int] = []
    labels: list[str] = []
    for k, pt in enumerate(coords, start=1):
        node, snap = snap_to_node(graph, pt)
        if snap > HUB_SNAP_WARN_M:
            log.warning("existing hub q%d snapped %.0f m (> %.0f m) to node %s",
                        k, snap, HUB_SNAP_WARN_M, graph.node_ids[node])
        nodes.append(node)
        labels.append(f"q{k}")
    return nodes, labels


def _parse_existing_list(args: argparse.Namespace) -> list[tuple[str, str | GeoPoint]]:
    if not args.existing:
        raise InputError(f"{args.subcommand}: at least one --existing hub is required")
    return [_parse_existing_item(item) for item in args.existing]


def cmd_build_matrix(args: argparse.Namespace) -> None:
    _require(args, ["--graph-nodes", "--graph-edges", "--candidates", "--deliveries"])
    out = _out_dir(args)
    graph = load_graph(args.graph_nodes, args.graph_edges)
    cset = load_candidates(args.candidates, graph)
    demand = load_deliveries(args.deliveries, graph)
    hub_nodes: list[int] = []
    hub_labels: list[str] = []
    if args.existing:
        coords = []
        for kind, val in _parse_existing_list(args):
            if kind != "coord":
                raise InputError("build-matrix takes --existing as 'lon,lat' coordinates")
            coords.append(val)
        hub_nodes, hub_labels = _snap_existing_coords(graph, coords)
    matrix = build_distance_matrix(
        graph,
        demand.nodes,
        cset.nodes + hub_nodes,
        args.engine,
        direction=args.direction,
        threads=args.threads,
        row_labels=demand.ids,
        column_labels=cset.ids + hub_labels,
    )
    path = out / "matrix.csv"
    save_matrix(matrix, path)
    _write_run(out, args, None)
    print(f"wrote {matrix.row_count}x{matrix.col_count} matrix to {path}")


def _scenario_from_args(args: argparse.Namespace, out: Path):
    """Build (matrix, existing cols, candidate cols, coordinate lookups).

    Two modes: --matrix with col:<id> references, or graph + candidate +
    delivery files with coordinate hubs (the matrix is then built in-process
    and saved alongside the results).
    """
    existing_items = _parse_existing_list(args)
    cand_rows = None
    demand_rows = None
    existing_coords: dict[str, GeoPoint] = {}
    if args.matrix:
        matrix = load_matrix(args.matrix)
        cols = []
        for kind, val in existing_items:
            if kind != "col":
                raise InputError("with --matrix, --existing must use col:<id>")
            cols.append(matrix.column_index(val))
        existing = frozenset(cols)
        candidates = frozenset(range(matrix.col_count)) - existing
        if args.candidates:
            cand_rows = _read_candidate_coords(args.candidates)
        if args.deliveries:
            demand_rows = _read_demand_coords(args.deliveries)
            if [d[0] for d in demand_rows] != list(matrix.row_labels):
                raise InputError("--deliveries file does not match the matrix delivery rows")
    else:
        _require(args, ["--graph-nodes", "--graph-edges", "--candidates", "--deliveries"])
        graph = load_graph(args.graph_nodes, args.graph_edges)
        cset = load_candidates(args.candidates, graph)
        demand = load_deliveries(args.deliveries, graph)
        coords = []
        for kind, val in existing_items:
            if kind != "coord":
                raise InputError("without --matrix, --existing must be 'lon,lat' coordinates")
            coords.append(val)
        hub_nodes, hub_labels = _snap_existing_coords(graph, coords)
        matrix = build_distance_matrix(
            graph,
            demand.nodes,
            cset.nodes + hub_nodes,
            args.engine,
            direction=args.direction,
            threads=args.threads,
            row_labels=demand.ids,
            column_labels=cset.ids + hub_labels,
        )
        save_matrix(matrix, out / "matrix.csv")
        candidates = frozenset(range(len(cset)))
        existing = frozenset(range(len(cset), matrix.col_count))
        cand_rows = [(c.candidate_id, c.point, c.node_id, c.snap_m) for c in cset.candidates]
        demand_rows = [(p.delivery_id, p.point) for p in demand.points]
        existing_coords = dict(zip(hub_labels, coords))
    return matrix, existing, candidates, cand_rows, demand_rows, existing_coords


def _emit_layers(
    out: Path,
    matrix: DistanceMatrix,
    existing: frozenset[int],
    result,
    winner_role: str,
    cand_rows,
    demand_rows,
    existing_coords: dict[str, GeoPoint],
) -> None:
    cand_coord = {cid: pt for cid, pt, _, _ in cand_rows} if cand_rows else {}
    if not cand_coord and not existing_coords and not demand_rows:
        log.warning("no coordinate files given; skipping GeoJSON layers")
        return
    hubs: list[tuple[str, GeoPoint, str]] = []
    for col in sorted(existing):
        label = matrix.column_labels[col]
        pt = existing_coords.get(label) or cand_coord.get(label)
        if pt is None:
            log.warning("no coordinates for existing hub %s; omitted from hubs layer", label)
            continue
        hubs.append((label, pt, "existing"))
    winner_label = matrix.column_labels[result.best_hub_column]
    winner_pt = cand_coord.get(winner_label) or existing_coords.get(winner_label)
    if winner_pt is None:
        log.warning("no coordinates for winning hub %s; omitted from hubs layer", winner_label)
    else:
        hubs.append((winner_label, winner_pt, winner_role))
    demand_layer = None
    if demand_rows:
        labels = [matrix.column_labels[c] for c in result.assigned_columns]
        demand_layer = [
            (did, pt, labels[i], float(result.assigned_meters[i]))
            for i, (did, pt) in enumerate(demand_rows)
        ]
    if not hubs:
        log.warning("no hub coordinates available; skipping GeoJSON layers")
        return
    export_geojson(hubs=hubs, out_dir=out, candidates=cand_rows, demand=demand_layer)


def _run_solve(args: argparse.Namespace, relocate_mode: bool) -> None:
    out = _out_dir(args)
    matrix, existing, candidates, cand_rows, demand_rows, existing_coords = _scenario_from_args(
        args, out
    )
    scenario = HubScenario(matrix, existing, candidates)
    if relocate_mode:
        kind, val = _parse_existing_item(args.remove)
        if kind != "col":
            raise InputError("--remove must use col:<id>")
        removed = matrix.column_index(val)
        if removed not in existing:
            raise InputError(f"--remove col:{val} is not an existing hub")
        keep = set(existing) - {removed}
        pool = set(candidates) | {removed}
        t0 = time.perf_counter()
        result = relocate(scenario, keep, pool)
        runtime = time.perf_counter() - t0
        winner_role = "relocated"
    else:
        t0 = time.perf_counter()
        result = solve_conditional_1median(scenario)
        runtime = time.perf_counter() - t0
        winner_role = "new"
    # Before/after comparison is against the full original hub set either way.
    rep = build_report(scenario, result, runtime, args.bin_km, args.bin_origin_km)
    write_report(rep, out / "report.json")
    _emit_layers(out, matrix, existing, result, winner_role, cand_rows, demand_rows, existing_coords)
    _write_run(out, args, runtime)
    print(
        f"best hub {rep.best_hub_label} (column {rep.best_hub_column}): "
        f"total {rep.total_cost_m:.1f} m, avg {rep.avg_after_km:.3f} km, "
        f"improvement {rep.improvement_pct:.1f}%"
    )


def cmd_solve(args: argparse.Namespace) -> None:
    _run_solve(args, relocate_mode=False)


def cmd_relocate(args: argparse.Namespace) -> None:
    _run_solve(args, relocate_mode=True)


def cmd_report(args: argparse.Namespace) -> None:
    _require(args, ["--matrix", "--chosen"])
    out = _out_dir(args)
    matrix = load_matrix(args.matrix)
    cols = []
    for kind, val in _parse_existing_list(args):
        if kind != "col":
            raise InputError("report takes --existing as col:<id>")
        cols.append(matrix.column_index(val))
    kind, val = _parse_existing_item(args.chosen)
    if kind != "col":
        raise InputError("--chosen must use col:<id>")
    chosen = matrix.column_index(val)
    scenario = HubScenario(matrix, frozenset(cols), frozenset({chosen}))
    t0 = time.perf_counter()
    result = solve_conditional_1median(scenario)
    runtime = time.perf_counter() - t0
    rep = build_report(scenario, result, runtime, args.bin_km, args.bin_origin_km)
    write_report(rep, out / "report.json")
    _write_run(out, args, runtime)
    print(
        f"hub {rep.best_hub_label}: total {rep.total_cost_m:.1f} m, "
        f"avg {rep.avg_after_km:.3f} km, improvement {rep.improvement_pct:.1f}%"
    )


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph-nodes", help="nodes CSV (node_id,lon,lat)")
    p.add_argument("--graph-edges", help="edges CSV (from_id,to_id,length_m,oneway)")


def _add_bin_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bin-km", type=float, default=2.0, help="histogram bin width in km")
    p.add_argument("--bin-origin-km", type=float, default=1.0,
                   help="start of the first regular bin; [0, origin) is the underflow bin")


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=ENGINES, default="dijkstra")
    p.add_argument("--direction", choices=DIRECTIONS, default="hub-to-delivery",
                   help="which endpoint acts as shortest-path source")
    p.add_argument("--threads", type=int, default=1, help="worker threads for matrix columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hubmedian",
        description="Road-network conditional 1-median: place one new hub among "
        "existing ones to minimize total delivery distance.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-candidates", help="lattice candidate sites over a region polygon")
    _add_graph_flags(p)
    p.add_argument("--region", help="GeoJSON Polygon/MultiPolygon clipping region")
    p.add_argument("--spacing-m", type=float, default=1300.0, help="lattice spacing in meters")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_gen_candidates)

    p = sub.add_parser("gen-demand", help="demand points from deliveries or population weights")
    _add_graph_flags(p)
    p.add_argument("--deliveries", help="delivery CSV (delivery_id,lon,lat)")
    p.add_argument("--sample", type=int, help="subsample this many deliveries")
    p.add_argument("--population", help="GeoJSON FeatureCollection with name/population")
    p.add_argument("--total", type=int, help="scale populations to this total demand count")
    p.add_argument("--seed", type=int, help="PRNG seed (required for --sample/--population)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_gen_demand)

    p = sub.add_parser("build-matrix", help="delivery x hub road-distance matrix CSV")
    _add_graph_flags(p)
    p.add_argument("--candidates", help="candidate CSV from gen-candidates")
    p.add_argument("--deliveries", help="demand CSV (delivery_id,lon,lat)")
    p.add_argument("--existing", action="append",
                   help="existing hub as 'lon,lat'; repeatable; appended as columns q1,q2,...")
    _add_engine_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_build_matrix)

    for name, help_text, handler in (
        ("solve", "scan candidates for the best additional hub", cmd_solve),
        ("relocate", "re-site one existing hub over the candidate pool", cmd_relocate),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--matrix", help="precomputed matrix CSV (use col:<id> hubs)")
        _add_graph_flags(p)
        p.add_argument("--candidates", help="candidate CSV (coordinates for layers/build)")
        p.add_argument("--deliveries", help="demand CSV (coordinates for layers/build)")
        p.add_argument("--existing", action="append",
                       help="existing hub: col:<id> with --matrix, else 'lon,lat'; repeatable")
        if name == "relocate":
            p.add_argument("--remove", required=True, help="hub column to re-site, col:<id>")
        _add_engine_flags(p)
        _add_bin_flags(p)
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(handler=handler)

    p = sub.add_parser("report", help="metrics for a fixed chosen hub column")
    p.add_argument("--matrix", help="matrix CSV")
    p.add_argument("--existing", action="append", help="existing hub col:<id>; repeatable")
    p.add_argument("--chosen", help="evaluated hub col:<id>")
    _add_bin_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        ids = exc.delivery_ids
        if ids:
            shown = ", ".join(ids[:20]) + (f", ... ({len(ids)} total)" if len(ids) > 20 else "")
            print(f"unreachable deliveries: {shown}", file=sys.stderr)
        return 3
    except (InputError, StaleIndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Road-network conditional 1-median toolkit for distribution hub placement."""

__version__ = "0.1.0"

from .candidates import (
    Candidate,
    CandidateSet,
    generate_grid,
    load_candidates,
    load_region,
    save_candidates,
    snap_candidates,
)
from .ch import CHIndex, build_ch, ch_many_to_many, ch_query
from .demand import (
    DemandPoint,
    DemandSet,
    WeightedRegion,
    generate_population_demand,
    load_deliveries,
    load_region_weights,
    sample_demand,
    save_demand,
    scale_weights,
)
from .dijkstra import dijkstra_one_to_many
from .errors import HubMedianError, InfeasibleError, InputError, StaleIndexError
from .geo import GeoPoint, GeoPolygon, haversine_m, point_in_polygon
from .graph import RoadGraph, load_graph, save_graph, snap_many, snap_to_node
from .matrix import DistanceMatrix, build_distance_matrix, load_matrix, save_matrix
from .report import (
    Histogram,
    MetricsReport,
    average_delivery_km,
    build_report,
    distance_histogram,
    export_geojson,
    improvement_pct,
    write_report,
)
from .rng import Xoshiro256StarStar
from .solver import (
    HubScenario,
    SolveResult,
    assign_nearest,
    best_existing_distances,
    evaluate_cost,
    relocate,
    solve_conditional_1median,
)

__all__ = [
    "CHIndex",
    "Candidate",
    "CandidateSet",
    "DemandPoint",
    "DemandSet",
    "DistanceMatrix",
    "GeoPoint",
    "GeoPolygon",
    "Histogram",
    "HubMedianError",
    "HubScenario",
    "InfeasibleError",
    "InputError",
    "MetricsReport",
    "RoadGraph",
    "SolveResult",
    "StaleIndexError",
    "WeightedRegion",
    "Xoshiro256StarStar",
    "__version__",
    "assign_nearest",
    "average_delivery_km",
    "best_existing_distances",
    "build_ch",
    "build_distance_matrix",
    "build_report",
    "ch_many_to_many",
    "ch_query",
    "dijkstra_one_to_many",
    "distance_histogram",
    "evaluate_cost",
    "export_geojson",
    "generate_grid",
    "generate_population_demand",
    "haversine_m",
    "improvement_pct",
    "load_candidates",
    "load_deliveries",
    "load_graph",
    "load_matrix",
    "load_region",
    "load_region_weights",
    "point_in_polygon",
    "relocate",
    "sample_demand",
    "save_candidates",
    "save_demand",
    "save_graph",
    "save_matrix",
    "scale_weights",
    "snap_candidates",
    "snap_many",
    "snap_to_node",
    "solve_conditional_1median",
    "write_report",
]

"""Temporal neighbourhood graphs, clique counting and witness complexes."""

from sctsa.complex.rips import (
    INF,
    FiltrationParams,
    SimplexCountCurve,
    TimedPointCloud,
    count_cliques,
    curve_from_births,
    default_grid,
    edge_births,
    list_cliques,
    neighborhood_graph,
    simplex_count_curve,
)
from sctsa.complex.witness import (
    LandmarkSet,
    lazy_witness_curve,
    maxmin_landmarks,
    witness_edge_births,
)

__all__ = [
    "INF",
    "FiltrationParams",
    "LandmarkSet",
    "SimplexCountCurve",
    "TimedPointCloud",
    "count_cliques",
    "curve_from_births",
    "default_grid",
    "edge_births",
    "lazy_witness_curve",
    "list_cliques",
    "maxmin_landmarks",
    "neighborhood_graph",
    "simplex_count_curve",
    "witness_edge_births",
]

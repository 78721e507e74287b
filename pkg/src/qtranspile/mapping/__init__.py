"""Layout and routing onto a coupling graph."""

from .layout import Layout, LayoutError, initial_layout
from .matrices import UNREACHABLE, FidelityMatrix, distance_matrix, fidelity_matrix
from .routing import (
    HEURISTICS,
    RoutingConfig,
    RoutingError,
    RoutingResult,
    RoutingState,
    StepRecord,
    circuit_graph_of,
    heuristic_score,
    sabre_layout,
    sabre_route,
    select_swap,
)

__all__ = [
    "Layout", "LayoutError", "initial_layout",
    "UNREACHABLE", "FidelityMatrix", "distance_matrix", "fidelity_matrix",
    "HEURISTICS", "RoutingConfig", "RoutingError", "RoutingResult", "RoutingState", "StepRecord",
    "circuit_graph_of", "heuristic_score", "sabre_layout", "sabre_route", "select_swap",
]

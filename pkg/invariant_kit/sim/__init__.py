"""Open- and closed-loop simulation with invariance diagnostics."""

from .analysis import (
    ComparisonOverlay,
    DistanceSeries,
    InvarianceResult,
    comparison_overlay,
    invariance_test,
    safe_grid,
    set_distance_series,
)
from .integrate import (
    ClosedLoop,
    Dynamics,
    OpenLoop,
    Trajectory,
    integrate,
    random_initial_states,
    simulate_many,
)

__all__ = [
    "ComparisonOverlay",
    "DistanceSeries",
    "InvarianceResult",
    "comparison_overlay",
    "invariance_test",
    "safe_grid",
    "set_distance_series",
    "ClosedLoop",
    "Dynamics",
    "OpenLoop",
    "Trajectory",
    "integrate",
    "random_initial_states",
    "simulate_many",
]

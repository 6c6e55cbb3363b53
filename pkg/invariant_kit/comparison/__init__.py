"""Minimal solutions of scalar comparison systems and dominance checks."""

from .minimal import (
    ComparisonTrajectory,
    DominanceRecord,
    SampledSeries,
    ScalarIVP,
    dominance_check,
    minimal_solution,
)

__all__ = [
    "ComparisonTrajectory",
    "DominanceRecord",
    "SampledSeries",
    "ScalarIVP",
    "dominance_check",
    "minimal_solution",
]

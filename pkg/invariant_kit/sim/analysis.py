"""Empirical checks along simulated trajectories."""

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from invariant_kit.comparison import (
    ComparisonTrajectory,
    DominanceRecord,
    SampledSeries,
    ScalarIVP,
    dominance_check,
    minimal_solution,
)
from invariant_kit.config import settings
from invariant_kit.expr import ExprFunction
from invariant_kit.minfunc import MuCandidate
from invariant_kit.models import BoxDomain
from invariant_kit.sim.integrate import Trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InvarianceResult:
    invariant: bool
    tol: float
    checked_until: float
    first_violation_time: Optional[float] = None
    violation_h: Optional[float] = None

    def summary(self) -> dict[str, Any]:
        return {
            "invariant": self.invariant,
            "tol": self.tol,
            "checked_until": self.checked_until,
            "first_violation_time": self.first_violation_time,
            "violation_h": self.violation_h,
        }


def invariance_test(traj: Trajectory, tol: Optional[float] = None) -> InvarianceResult:
    """h(x(t)) >= -tol at every kept sample."""
    tol = tol if tol is not None else settings.invariance_tol
    below = np.flatnonzero(traj.h_values < -tol)
    checked_until = float(traj.times[-1])
    if below.size:
        first = int(below[0])
        return InvarianceResult(False, tol, checked_until, float(traj.times[first]), float(traj.h_values[first]))
    return InvarianceResult(True, tol, checked_until)


@dataclass(frozen=True)
class ComparisonOverlay:
    """h along a trajectory against the minimal comparison solution from h(x0)."""

    trajectory: Trajectory
    comparison: ComparisonTrajectory
    dominance: DominanceRecord

    def table(self) -> tuple[list[str], np.ndarray]:
        n = min(len(self.trajectory.times), len(self.comparison.times))
        rows = np.column_stack(
            [
                self.trajectory.times[:n],
                self.trajectory.h_values[:n],
                self.comparison.estimate[:n],
                self.comparison.error_estimate[:n],
            ]
        )
        return ["t", "h", "w_min", "err_estimate"], rows

    def summary(self) -> dict[str, Any]:
        return {"dominance": self.dominance.summary(), "comparison": self.comparison.summary()}


def comparison_overlay(
    traj: Trajectory,
    mu: MuCandidate,
    eps0: Optional[float] = None,
    n_refine: Optional[int] = None,
    tol: Optional[float] = None,
    threads: Optional[int] = None,
) -> ComparisonOverlay:
    """Check h(x(t)) >= w(t) where w is the minimal solution of w' = -mu(w), w(0) = h(x0).

    The comparison is integrated on the trajectory's own time grid.
    """
    if len(traj.times) < 2:
        raise ValueError("Trajectory needs at least two samples")
    ivp = ScalarIVP(mu.mu, float(traj.h_values[0]), float(traj.times[-1]), traj.step)
    comparison = minimal_solution(ivp, eps0=eps0, n_refine=n_refine, threads=threads)
    record = dominance_check(SampledSeries(traj.times, traj.h_values), comparison, tol)
    if not record.dominates:
        logger.warning(
            f"h(x(t)) falls below the minimal comparison solution at t={record.first_violation_time:.6g}"
        )
    return ComparisonOverlay(traj, comparison, record)


def safe_grid(domain: BoxDomain, h: ExprFunction) -> np.ndarray:
    """Grid points of the box with h >= 0."""
    grid = domain.points()
    return grid[h.eval_many(grid) >= 0]


@dataclass(frozen=True)
class DistanceSeries:
    times: np.ndarray
    distances: np.ndarray

    @property
    def nonincreasing_fraction(self) -> float:
        """Share of steps along which the distance did not grow."""
        if len(self.distances) < 2:
            return 1.0
        return float(np.mean(np.diff(self.distances) <= 1e-12))

    @property
    def decaying(self) -> bool:
        return self.distances[-1] <= self.distances[0] and self.nonincreasing_fraction == 1.0

    def summary(self) -> dict[str, Any]:
        return {
            "initial": float(self.distances[0]),
            "final": float(self.distances[-1]),
            "max": float(self.distances.max()),
            "nonincreasing_fraction": self.nonincreasing_fraction,
            "decaying": self.decaying,
        }


def set_distance_series(traj: Trajectory, S_grid: np.ndarray) -> DistanceSeries:
    """Distance from x(t) to S per time sample: 0 where h >= 0, else to the nearest grid point of S."""
    S_grid = np.atleast_2d(np.asarray(S_grid, dtype=float))
    if not S_grid.size:
        raise ValueError("S_grid is empty")
    distances = np.array(
        [
            0.0 if h >= 0 else float(np.min(np.linalg.norm(S_grid - x, axis=1)))
            for x, h in zip(traj.states, traj.h_values)
        ]
    )
    return DistanceSeries(traj.times, distances)

"""Minimal solutions of scalar comparison systems.

The minimal solution of w' = -mu(w), w(0) = w0 is approximated from below by
the perturbed family r' = -mu(r) - eps, r(0) = w0 - eps with eps halving each
refinement; the finest member is the estimate.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from invariant_kit.config import settings
from invariant_kit.errors import GridMismatch, NonMonotoneFamily
from invariant_kit.expr import ScalarFunction
from invariant_kit.parallel import parallel_map
from invariant_kit.rk4 import integrate_scalar, time_grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalarIVP:
    """w' = -mu(w), w(0) = w0 on [0, t_end]."""

    mu: ScalarFunction
    w0: float
    t_end: float
    step: float = field(default_factory=lambda: settings.comparison_step)

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.t_end <= 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if len(self.mu.variables) != 1:
            raise ValueError(f"mu must have exactly one variable, got {self.mu.variables}")


@dataclass
class ComparisonTrajectory:
    """Perturbed family r_k on a shared grid plus the limit estimate."""

    epsilons: np.ndarray
    times: np.ndarray
    trajectories: np.ndarray  # (len(epsilons), len(times))
    estimate: np.ndarray
    error_estimate: np.ndarray
    blowup_time: Optional[float] = None

    def table(self) -> tuple[list[str], np.ndarray]:
        """Header and rows for CSV export: t, r_1..r_N, estimate, err_estimate."""
        header = ["t"] + [f"r_{k + 1}" for k in range(len(self.epsilons))] + ["estimate", "err_estimate"]
        rows = np.column_stack([self.times, self.trajectories.T, self.estimate, self.error_estimate])
        return header, rows

    def summary(self) -> dict:
        return {
            "epsilons": [float(e) for e in self.epsilons],
            "t_end": float(self.times[-1]),
            "estimate_final": float(self.estimate[-1]),
            "max_error_estimate": float(np.max(self.error_estimate)),
            "blowup_time": self.blowup_time,
        }


@dataclass(frozen=True)
class SampledSeries:
    """A real function sampled on a time grid."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")


@dataclass(frozen=True)
class DominanceRecord:
    """Outcome of comparing eta(t) against the minimal-solution estimate."""

    dominates: bool
    min_gap: float
    compared_points: int
    first_violation_time: Optional[float] = None
    violation_gap: Optional[float] = None

    def summary(self) -> dict:
        return {
            "dominates": self.dominates,
            "min_gap": self.min_gap,
            "compared_points": self.compared_points,
            "first_violation_time": self.first_violation_time,
            "violation_gap": self.violation_gap,
        }


def minimal_solution(
    ivp: ScalarIVP,
    eps0: Optional[float] = None,
    n_refine: Optional[int] = None,
    escape_floor: Optional[float] = None,
    threads: Optional[int] = None,
) -> ComparisonTrajectory:
    """Integrate the eps-perturbed family and return it with the estimate.

    The family uses eps0 / 2**k for k = 0..n_refine.
    """
    eps0 = settings.eps0 if eps0 is None else eps0
    n_refine = settings.n_refine if n_refine is None else n_refine
    floor = settings.escape_floor if escape_floor is None else escape_floor
    if eps0 <= 0:
        raise ValueError(f"eps0 must be positive, got {eps0}")
    if n_refine < 2:
        raise ValueError(f"n_refine must be at least 2, got {n_refine}")

    times = time_grid(ivp.t_end, ivp.step)
    epsilons = eps0 * 0.5 ** np.arange(n_refine + 1)

    def solve(eps: float):
        def rhs(t: float, r: float) -> float:
            return -ivp.mu.eval((r,)) - eps

        return integrate_scalar(rhs, ivp.w0 - eps, times, floor)

    results = parallel_map(solve, [float(e) for e in epsilons], threads)
    escapes = [index for _, index in results if index is not None]
    cut = min(escapes) if escapes else len(times)
    blowup_time = float(times[cut]) if escapes else None
    if blowup_time is not None:
        logger.info(f"Comparison solution escapes below {floor:g} at t={blowup_time:.6g}; grid truncated")

    trajectories = np.vstack([values[:cut] for values, _ in results])
    times = times[:cut]
    _check_monotone(trajectories, times, 10.0 * ivp.step**2)

    estimate = trajectories[-1].copy()
    estimate[0] = ivp.w0
    error_estimate = np.abs(trajectories[-1] - trajectories[-2])
    logger.debug(f"Minimal solution: {len(epsilons)} refinements, final estimate {estimate[-1]:.6g}")
    return ComparisonTrajectory(epsilons, times, trajectories, estimate, error_estimate, blowup_time)


def _check_monotone(trajectories: np.ndarray, times: np.ndarray, tolerance: float):
    """Smaller eps must give a larger trajectory at every grid point."""
    gaps = trajectories[:-1] - trajectories[1:]
    worst = np.unravel_index(np.argmax(gaps), gaps.shape) if gaps.size else None
    if worst is not None and gaps[worst] > tolerance:
        k, i = int(worst[0]), int(worst[1])
        raise NonMonotoneFamily(float(times[i]), k, float(gaps[worst]))


def _match_grid(coarse: np.ndarray, fine: np.ndarray) -> Optional[np.ndarray]:
    """Indices into fine of every coarse time, or None if some are missing."""
    index = np.clip(np.searchsorted(fine, coarse), 0, len(fine) - 1)
    below = np.clip(index - 1, 0, len(fine) - 1)
    nearer = np.where(np.abs(fine[below] - coarse) < np.abs(fine[index] - coarse), below, index)
    scale = np.maximum(1.0, np.abs(coarse))
    if np.all(np.abs(fine[nearer] - coarse) <= 1e-9 * scale):
        return nearer
    return None


def dominance_check(
    eta: SampledSeries,
    traj: ComparisonTrajectory,
    tol: Optional[float] = None,
) -> DominanceRecord:
    """Check eta(t) >= estimate(t) - tol - err(t) on the shared grid points."""
    tol = settings.dominance_tol if tol is None else tol
    eta_times = np.asarray(eta.times, dtype=float)
    eta_values = np.asarray(eta.values, dtype=float)

    # compare where both grids have points, up to the shorter horizon
    horizon = min(eta_times[-1], traj.times[-1])
    traj_mask = traj.times <= horizon * (1 + 1e-12) + 1e-12
    eta_mask = eta_times <= horizon * (1 + 1e-12) + 1e-12
    traj_times, eta_times_in = traj.times[traj_mask], eta_times[eta_mask]

    in_eta = _match_grid(traj_times, eta_times_in)
    if in_eta is not None:
        eta_at = eta_values[eta_mask][in_eta]
        traj_index = np.flatnonzero(traj_mask)
    else:
        in_traj = _match_grid(eta_times_in, traj_times)
        if in_traj is None:
            raise GridMismatch(
                f"eta grid ({len(eta_times)} points) and comparison grid ({len(traj.times)} points) "
                "are not nested"
            )
        eta_at = eta_values[eta_mask]
        traj_index = np.flatnonzero(traj_mask)[in_traj]

    estimate = traj.estimate[traj_index]
    allowance = tol + traj.error_estimate[traj_index]
    gap = eta_at - estimate
    violations = np.flatnonzero(gap + allowance < 0)
    if violations.size:
        first = int(violations[0])
        return DominanceRecord(
            dominates=False,
            min_gap=float(np.min(gap)),
            compared_points=len(gap),
            first_violation_time=float(traj.times[traj_index[first]]),
            violation_gap=float(gap[first]),
        )
    return DominanceRecord(True, float(np.min(gap)), len(gap))

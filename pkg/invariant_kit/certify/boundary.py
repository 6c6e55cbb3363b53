"""Boundary cross-checks: the tangency condition on h = 0 and distance quotients."""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional, Sequence

import numpy as np

from invariant_kit.certify.problem import BarrierProblem
from invariant_kit.config import settings
from invariant_kit.errors import EmptyBoundary

logger = logging.getLogger(__name__)

# factor applied when the boundary band catches no grid point
BAND_WIDENING = 10.0


@dataclass
class BoundaryBand:
    """Grid points with |h(x)| <= band."""

    points: np.ndarray
    h: np.ndarray
    lfh: np.ndarray
    grad_norms: np.ndarray
    band: float
    widened: bool = False


def boundary_band_points(prob: BarrierProblem, band: Optional[float] = None) -> BoundaryBand:
    """Collect the approximate zero level set, widening the band once if empty."""
    if prob.time_varying:
        raise ValueError("Boundary checks apply to time-invariant problems")
    band = band if band is not None else settings.boundary_band
    points = prob.domain.points()
    lie = prob.lie(points)
    n = prob.dimension
    widened = False
    mask = np.abs(lie.h) <= band
    if not mask.any():
        band *= BAND_WIDENING
        widened = True
        logger.warning(f"No grid point in the boundary band; widened to {band:g}")
        mask = np.abs(lie.h) <= band
        if not mask.any():
            raise EmptyBoundary(band)
    grad_norms = np.linalg.norm(lie.gradients[mask][:, :n], axis=1)
    return BoundaryBand(points[mask], lie.h[mask], lie.lfh[mask], grad_norms, band, widened)


@dataclass
class NagumoResult:
    """L_f h >= 0 on the approximate boundary, with a regularity flag."""

    passed: bool
    boundary: BoundaryBand
    tol: float
    min_lfh: float
    witness: Optional[list[float]] = None
    min_grad_norm: float = 0.0
    irregular: bool = False

    def summary(self) -> dict[str, Any]:
        return {
            "outcome": "pass" if self.passed else "fail",
            "band": self.boundary.band,
            "band_widened": self.boundary.widened,
            "boundary_points": int(len(self.boundary.points)),
            "min_lfh": self.min_lfh,
            "witness": self.witness,
            "min_grad_norm": self.min_grad_norm,
            "zero_may_not_be_regular_value": self.irregular,
        }


def nagumo_boundary_check(
    prob: BarrierProblem,
    band: Optional[float] = None,
    tol: Optional[float] = None,
    regularity_threshold: Optional[float] = None,
) -> NagumoResult:
    """Check L_f h(x) >= -tol at grid points with |h(x)| <= band.

    The condition is only necessary and sufficient when 0 is a regular value
    of h, so the smallest gradient norm in the band is reported as well.
    """
    tol = tol if tol is not None else settings.certify_tol
    threshold = regularity_threshold if regularity_threshold is not None else settings.regularity_threshold
    boundary = boundary_band_points(prob, band)

    index = int(np.argmin(boundary.lfh))
    min_lfh = float(boundary.lfh[index])
    passed = min_lfh >= -tol
    min_grad_norm = float(boundary.grad_norms.min())
    result = NagumoResult(
        passed=passed,
        boundary=boundary,
        tol=tol,
        min_lfh=min_lfh,
        witness=None if passed else [float(v) for v in boundary.points[index]],
        min_grad_norm=min_grad_norm,
        irregular=min_grad_norm < threshold,
    )
    if result.irregular:
        logger.warning(
            f"|grad h| = {min_grad_norm:.3e} on the boundary band: 0 may not be a regular value of h"
        )
    logger.info(f"Boundary tangency check: {'pass' if passed else 'fail'} on {len(boundary.points)} points")
    return result


@dataclass
class DistanceQuotientResult:
    """rho(x + eps f(x), S) / eps per boundary point and eps."""

    eps_sequence: list[float]
    points: np.ndarray
    quotients: np.ndarray  # (n_points, n_eps)
    trends: list[Literal["to_zero", "bounded_away"]]
    exact_distance: bool = False

    @property
    def all_to_zero(self) -> bool:
        return all(trend == "to_zero" for trend in self.trends)

    def table(self) -> tuple[list[str], list[list[float]]]:
        n = self.points.shape[1]
        header = [f"x{i + 1}" for i in range(n)] + ["eps", "quotient"]
        rows = []
        for point, row in zip(self.points, self.quotients):
            for eps, quotient in zip(self.eps_sequence, row):
                rows.append([float(v) for v in point] + [eps, float(quotient)])
        return header, rows

    def summary(self) -> dict[str, Any]:
        return {
            "outcome": "pass" if self.all_to_zero else "fail",
            "eps_sequence": self.eps_sequence,
            "boundary_points": int(len(self.points)),
            "bounded_away_points": [
                [float(v) for v in point]
                for point, trend in zip(self.points, self.trends)
                if trend == "bounded_away"
            ],
            "max_final_quotient": float(self.quotients[:, -1].max()) if len(self.points) else 0.0,
            "exact_distance": self.exact_distance,
        }


def _trend(row: np.ndarray, zero: float) -> Literal["to_zero", "bounded_away"]:
    if row[-1] <= zero or row[-1] <= 0.5 * row[0]:
        return "to_zero"
    return "bounded_away"


def distance_quotient_check(
    prob: BarrierProblem,
    eps_sequence: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
    boundary_points: Optional[np.ndarray] = None,
    band: Optional[float] = None,
    distance: Optional[Callable[[np.ndarray], float]] = None,
    zero: Optional[float] = None,
) -> DistanceQuotientResult:
    """Quotients rho(x + eps f(x), S) / eps at boundary points.

    rho is 0 when h(x + eps f(x)) >= 0, else the distance to the nearest grid
    point of S unless an exact ``distance`` is supplied. A trend is to_zero if
    the last quotient is negligible or at most half the first.
    """
    eps_sequence = [float(e) for e in eps_sequence]
    if not eps_sequence or any(e <= 0 for e in eps_sequence):
        raise ValueError("eps_sequence must be nonempty and positive")
    if any(b >= a for a, b in zip(eps_sequence, eps_sequence[1:])):
        raise ValueError("eps_sequence must be decreasing")
    zero = zero if zero is not None else settings.certify_tol

    if boundary_points is None:
        boundary_points = boundary_band_points(prob, band).points
    boundary_points = np.atleast_2d(np.asarray(boundary_points, dtype=float))

    grid = prob.domain.points()
    safe_points = grid[prob.h.eval_many(grid) >= 0]
    if distance is None and not len(safe_points):
        raise EmptyBoundary(0.0)

    field_values = prob.f.eval_many(boundary_points)
    quotients = np.zeros((len(boundary_points), len(eps_sequence)))
    for j, eps in enumerate(eps_sequence):
        moved = boundary_points + eps * field_values
        outside = prob.h.eval_many(moved) < 0
        for i in np.flatnonzero(outside):
            if distance is not None:
                rho = float(distance(moved[i]))
            else:
                rho = float(np.min(np.linalg.norm(safe_points - moved[i], axis=1)))
            quotients[i, j] = rho / eps

    trends = [_trend(row, zero) for row in quotients]
    logger.info(
        f"Distance quotients: {trends.count('to_zero')}/{len(trends)} boundary points trend to zero"
    )
    return DistanceQuotientResult(eps_sequence, boundary_points, quotients, trends, distance is not None)

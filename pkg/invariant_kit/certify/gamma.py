"""Tightest comparison function from level-band minima of L_f h.

Gamma(w) is the smallest L_f h over grid points whose h lies within band of
w; -Gamma is then the tightest mu the barrier inequality allows. Compactness
of the level sets near 0 is assumed, not checked.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from invariant_kit.certify.problem import BarrierProblem
from invariant_kit.config import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampledFunction:
    """Piecewise-linear function of one variable through (nodes, values).

    Constant beyond the end nodes; usable wherever a parsed mu is.
    """

    nodes: np.ndarray
    values: np.ndarray
    variables: tuple[str, ...] = ("w",)

    def __post_init__(self):
        if len(self.nodes) < 2 or len(self.nodes) != len(self.values):
            raise ValueError("Need at least two nodes and one value per node")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("Nodes must be strictly increasing")

    def eval(self, point: Sequence[float]) -> float:
        return float(np.interp(point[0], self.nodes, self.values))

    def eval_many(self, points) -> np.ndarray:
        w = np.asarray(points, dtype=float).reshape(len(points), -1)[:, 0]
        return np.interp(w, self.nodes, self.values)


@dataclass
class GammaResult:
    """Sampled Gamma with its empty levels and empirical modulus of continuity."""

    w_grid: np.ndarray
    gamma: np.ndarray  # NaN where the level band is empty
    band: float
    modulus: Optional[float]
    h_range: tuple[float, float]

    @property
    def empty(self) -> np.ndarray:
        return np.isnan(self.gamma)

    def table(self) -> tuple[list[str], np.ndarray]:
        return ["w", "gamma"], np.column_stack([self.w_grid, self.gamma])

    def summary(self) -> dict[str, Any]:
        return {
            "band": self.band,
            "levels": int(len(self.w_grid)),
            "empty_levels": [float(w) for w in self.w_grid[self.empty]],
            "modulus_of_continuity": self.modulus,
            "observed_h_range": list(self.h_range),
        }


def gamma_construct(
    prob: BarrierProblem,
    w_grid: Sequence[float],
    band: Optional[float] = None,
) -> GammaResult:
    """Gamma(w) = min{L_f h(x) : |h(x) - w| <= band} over the box grid."""
    if prob.time_varying:
        raise ValueError("gamma_construct applies to time-invariant problems")
    band = band if band is not None else settings.boundary_band
    w_grid = np.asarray(sorted(float(w) for w in w_grid))
    lie = prob.lie(prob.domain.points())

    gamma = np.full(len(w_grid), np.nan)
    for i, w in enumerate(w_grid):
        mask = np.abs(lie.h - w) <= band
        if mask.any():
            gamma[i] = lie.lfh[mask].min()
        else:
            logger.debug(f"Empty level band at w={w:g}")

    filled = ~np.isnan(gamma)
    modulus = None
    if np.count_nonzero(filled) >= 2:
        ws, gs = w_grid[filled], gamma[filled]
        modulus = float(np.max(np.abs(np.diff(gs)) / np.diff(ws)))

    empty = int(np.count_nonzero(~filled))
    if empty:
        logger.warning(f"{empty} of {len(w_grid)} levels have no grid point within band {band:g}")
    return GammaResult(w_grid, gamma, band, modulus, (float(lie.h.min()), float(lie.h.max())))


def tightest_mu(result: GammaResult) -> SampledFunction:
    """-Gamma on the non-empty levels, as a comparison function of w."""
    filled = ~result.empty
    if np.count_nonzero(filled) < 2:
        raise ValueError("Need at least two non-empty levels")
    return SampledFunction(result.w_grid[filled], -result.gamma[filled])

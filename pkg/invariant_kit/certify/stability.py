"""Stability certificate level from the sign of mu left of 0."""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from invariant_kit.config import settings
from invariant_kit.expr import ScalarFunction
from invariant_kit.minfunc import MuCandidate

logger = logging.getLogger(__name__)

SANDWICH_CAVEAT = (
    "The certificate also needs -beta(dist(x, S)) <= h(x) <= -alpha(dist(x, S)) "
    "outside S for class-K alpha and beta; this is not checked."
)


@dataclass(frozen=True)
class StabilityResult:
    certificate: Literal["asymptotic_certificate", "stability_certificate", "none"]
    delta: float
    max_mu: float
    caveat: str = SANDWICH_CAVEAT

    def summary(self) -> dict:
        return {"certificate": self.certificate, "delta": self.delta, "max_mu": self.max_mu, "caveat": self.caveat}


def stability_classify(
    mu: Union[MuCandidate, ScalarFunction],
    delta: float,
    sample_count: Optional[int] = None,
    zero: Optional[float] = None,
) -> StabilityResult:
    """mu < 0 on [-delta, 0) gives asymptotic stability, mu <= 0 gives stability."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if isinstance(mu, MuCandidate):
        sample_count = sample_count or mu.sample_count
        mu = mu.mu
    sample_count = sample_count or settings.sample_count
    zero = zero if zero is not None else settings.zero_threshold

    w = np.linspace(-delta, 0.0, sample_count)[:-1]
    max_mu = float(mu.eval_many(w.reshape(-1, 1)).max())
    if max_mu < -zero:
        certificate = "asymptotic_certificate"
    elif max_mu <= zero:
        certificate = "stability_certificate"
    else:
        certificate = "none"
    logger.info(f"Stability classification on [-{delta:g}, 0): {certificate}")
    return StabilityResult(certificate, float(delta), max_mu)

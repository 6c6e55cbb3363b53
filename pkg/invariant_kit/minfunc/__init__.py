"""Minimal-function classification."""

from .classifier import (
    SAMPLED_CAVEAT,
    DivergenceResult,
    MuCandidate,
    classify,
    divergence_test,
)
from .quadrature import adaptive_simpson

__all__ = [
    "SAMPLED_CAVEAT",
    "DivergenceResult",
    "MuCandidate",
    "adaptive_simpson",
    "classify",
    "divergence_test",
]

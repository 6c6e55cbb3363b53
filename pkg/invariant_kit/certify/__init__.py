"""Sampled certification of minimal barrier functions."""

from .barrier import (
    VERDICTS,
    CertificationReport,
    check_mbf,
    check_tmbf,
    classify_time_varying,
)
from .boundary import (
    BoundaryBand,
    DistanceQuotientResult,
    NagumoResult,
    boundary_band_points,
    distance_quotient_check,
    nagumo_boundary_check,
)
from .gamma import GammaResult, SampledFunction, gamma_construct, tightest_mu
from .problem import BarrierProblem, LieSample, lg_h, lie_derivatives
from .stability import SANDWICH_CAVEAT, StabilityResult, stability_classify

__all__ = [
    "VERDICTS",
    "CertificationReport",
    "check_mbf",
    "check_tmbf",
    "classify_time_varying",
    "BoundaryBand",
    "DistanceQuotientResult",
    "NagumoResult",
    "boundary_band_points",
    "distance_quotient_check",
    "nagumo_boundary_check",
    "GammaResult",
    "SampledFunction",
    "gamma_construct",
    "tightest_mu",
    "BarrierProblem",
    "LieSample",
    "lg_h",
    "lie_derivatives",
    "SANDWICH_CAVEAT",
    "StabilityResult",
    "stability_classify",
]

"""Data models for invariant-kit."""

from .problem import (
    BoxDomain,
    ClassifyJob,
    CertifyJob,
    CompareJob,
    DistanceQuotientJob,
    Expressions,
    GammaJob,
    Job,
    NagumoJob,
    ProblemConfig,
    QPScanJob,
    SimulateJob,
    StabilityJob,
    TimeDomain,
    Tolerances,
)
from .verdicts import (
    DeclaredProperties,
    MinimalityVerdict,
    SafeControlResult,
)

__all__ = [
    "BoxDomain",
    "ClassifyJob",
    "CertifyJob",
    "CompareJob",
    "DistanceQuotientJob",
    "Expressions",
    "GammaJob",
    "Job",
    "NagumoJob",
    "ProblemConfig",
    "QPScanJob",
    "SimulateJob",
    "StabilityJob",
    "TimeDomain",
    "Tolerances",
    "DeclaredProperties",
    "MinimalityVerdict",
    "SafeControlResult",
]

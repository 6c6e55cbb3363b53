"""Minimal-function classification of scalar comparison functions mu.

The decision cascade checks, in order: mu(0) < 0; mu <= 0 on a left
neighbourhood of 0; sign changes in every left neighbourhood; mu >= 0 near 0
with a non-integrable 1/mu. A declared locally Lipschitz mu with mu(0) <= 0 is
accepted without sampling. Sampled verdicts are semi-decisions.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from invariant_kit.config import settings
from invariant_kit.errors import SignViolation
from invariant_kit.expr import ScalarFunction
from invariant_kit.minfunc.quadrature import adaptive_simpson
from invariant_kit.models import DeclaredProperties, MinimalityVerdict

logger = logging.getLogger(__name__)

SAMPLED_CAVEAT = (
    "Sampled verdicts come from sign checks on finite grids and may miss sign "
    "changes between samples."
)

# panels over which the decay of the partial-integral increments is measured
DIVERGENCE_WINDOW = 10


@dataclass(frozen=True)
class MuCandidate:
    """A comparison function mu(w) with optional user assertions."""

    mu: ScalarFunction
    declared: DeclaredProperties = field(default_factory=DeclaredProperties)
    probe_interval: tuple[float, float] = (-1.0, 0.0)
    sample_count: int = field(default_factory=lambda: settings.sample_count)

    def __post_init__(self):
        left, right = self.probe_interval
        if not left < 0:
            raise ValueError(f"probe interval must start below 0, got {left}")
        if right != 0:
            raise ValueError(f"probe interval must end at 0, got {right}")
        if self.sample_count < 3:
            raise ValueError(f"sample_count must be at least 3, got {self.sample_count}")
        if len(self.mu.variables) != 1:
            raise ValueError(f"mu must have exactly one variable, got {self.mu.variables}")

    @property
    def probe_width(self) -> float:
        return -self.probe_interval[0]


@dataclass
class DivergenceResult:
    """Partial integrals of 1/mu towards 0 from below and the decision on them."""

    outcome: Literal["divergent", "convergent", "inconclusive"]
    eps: float
    etas: list[float]
    partial_integrals: list[float]
    decay_exponent: Optional[float] = None
    declared: bool = False

    def summary(self) -> dict:
        return {
            "outcome": self.outcome,
            "eps": self.eps,
            "etas": self.etas,
            "partial_integrals": self.partial_integrals,
            "decay_exponent": self.decay_exponent,
            "declared": self.declared,
        }


def divergence_test(
    mu: ScalarFunction,
    eps: float,
    eta_sequence_len: Optional[int] = None,
    tol: Optional[float] = None,
) -> DivergenceResult:
    """Decide whether the integral of 1/mu over [-eps, 0) diverges.

    I_j integrates 1/mu from -eps to -eps*2^-j panel by panel. The increments
    over the last panels are compared against s = -ln(eta): decay no faster
    than 1/s means the partial sums keep growing like a logarithm or worse.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    length = eta_sequence_len if eta_sequence_len is not None else settings.eta_sequence_len
    if length < DIVERGENCE_WINDOW:
        raise ValueError(f"eta_sequence_len must be at least {DIVERGENCE_WINDOW}, got {length}")
    tol = tol if tol is not None else settings.simpson_tol

    def integrand(w: float) -> float:
        value = mu.eval((w,))
        if not value > 0:
            raise SignViolation(w, value)
        return 1.0 / value

    etas = [eps * 2.0 ** -j for j in range(length + 1)]
    partial = [0.0]
    increments = []
    for j in range(1, length + 1):
        # tolerance relative to the panel's size once it exceeds 1
        width = etas[j - 1] - etas[j]
        scale = max(1.0, width * integrand(-0.5 * (etas[j - 1] + etas[j])))
        panel, _ = adaptive_simpson(integrand, -etas[j - 1], -etas[j], tol * scale)
        increments.append(panel)
        partial.append(partial[-1] + panel)

    window = increments[-DIVERGENCE_WINDOW:]
    first, last = window[0], window[-1]
    s_first = -math.log(etas[length - DIVERGENCE_WINDOW + 1])
    s_last = -math.log(etas[length])

    exponent = None
    if first > 0 and last > 0 and s_first > 0:
        exponent = -math.log(last / first) / math.log(s_last / s_first)

    if last < 1e-9:
        outcome = "convergent"
    elif exponent is not None and min(window) > 0 and exponent <= 1.05:
        outcome = "divergent"
    elif exponent is not None and exponent >= 1.5:
        outcome = "convergent"
    else:
        outcome = "inconclusive"

    logger.debug(f"divergence test eps={eps:g}: last increment {last:.3e}, decay exponent {exponent}")
    return DivergenceResult(outcome, eps, etas[1:], partial[1:], exponent)


@dataclass
class _SweepLevel:
    eps: float
    has_positive: bool
    has_negative: bool
    all_positive: bool
    max_value: float
    witnesses: Optional[tuple[float, float]] = None


def _sweep(cand: MuCandidate, zero: float, levels: int) -> list[_SweepLevel]:
    """Sign pattern of mu on [-eps, 0) for eps = k, k/2, k/4, ..."""
    sweep = []
    for j in range(levels):
        eps = cand.probe_width / 2.0**j
        w = np.linspace(-eps, 0.0, cand.sample_count)[:-1]
        values = cand.mu.eval_many(w.reshape(-1, 1))
        positive = values > zero
        negative = values < -zero
        level = _SweepLevel(
            eps, bool(positive.any()), bool(negative.any()), bool(positive.all()), float(values.max())
        )
        if level.has_positive and level.has_negative:
            level.witnesses = (float(w[np.argmax(positive)]), float(w[np.argmax(negative)]))
        sweep.append(level)
    return sweep


def classify(
    cand: MuCandidate,
    zero: Optional[float] = None,
    sweep_levels: Optional[int] = None,
    eta_sequence_len: Optional[int] = None,
) -> MinimalityVerdict:
    """Run the decision cascade; the first matching case wins."""
    zero = zero if zero is not None else settings.zero_threshold
    levels = sweep_levels if sweep_levels is not None else settings.sweep_levels
    declared = cand.declared

    mu0 = float(cand.mu.eval((0.0,)))
    if mu0 < -zero:
        return MinimalityVerdict(status="minimal", case="1", evidence={"mu0": mu0}, confidence="exact")
    if mu0 > zero:
        return MinimalityVerdict(
            status="not_minimal",
            evidence={"mu0": mu0, "reason": "mu(0) > 0, so the comparison solution from 0 leaves 0 downwards"},
            confidence="exact",
        )
    if declared.locally_lipschitz:
        return MinimalityVerdict(
            status="minimal",
            case="corollary1",
            evidence={"mu0": mu0, "reason": "declared locally Lipschitz with mu(0) <= 0", "note": declared.note},
            confidence="exact",
        )

    sweep = _sweep(cand, zero, levels)

    seen_positive = False
    for level in sweep:
        # tiny positive values after positive coarser levels are mu shrinking below the threshold
        underflow = seen_positive and not level.has_negative and level.max_value > 0
        if not level.has_positive and not underflow:
            return MinimalityVerdict(status="minimal", case="2", evidence={"eps": level.eps}, confidence="sampled")
        seen_positive = seen_positive or level.has_positive

    if all(level.witnesses is not None for level in sweep):
        witnesses = [
            {"eps": level.eps, "w_positive": level.witnesses[0], "w_negative": level.witnesses[1]}
            for level in sweep
        ]
        return MinimalityVerdict(status="minimal", case="3", evidence={"witnesses": witnesses}, confidence="sampled")

    if any(level.has_negative for level in sweep):
        return MinimalityVerdict(
            status="inconclusive",
            evidence={"reason": "mu changes sign at some scales but not at every scale"},
            confidence="sampled",
        )

    if declared.divergent_integral is not None:
        outcome = "divergent" if declared.divergent_integral else "convergent"
        divergence = DivergenceResult(outcome, cand.probe_width, [], [], declared=True)
    else:
        eps_div = next((level.eps for level in sweep if level.all_positive), None)
        if eps_div is None:
            return MinimalityVerdict(
                status="inconclusive",
                evidence={"reason": "mu is nonnegative but vanishes at every swept scale"},
                confidence="sampled",
            )
        divergence = divergence_test(cand.mu, eps_div, eta_sequence_len)

    evidence = {"divergence": divergence.summary()}
    if declared.note:
        evidence["note"] = declared.note
    if divergence.outcome == "divergent":
        return MinimalityVerdict(status="minimal", case="4", evidence=evidence, confidence="sampled")
    if divergence.outcome == "convergent":
        evidence["reason"] = "mu > 0 near 0 and 1/mu is integrable up to 0"
        return MinimalityVerdict(status="not_minimal", evidence=evidence, confidence="sampled")
    evidence["reason"] = "divergence test inconclusive"
    return MinimalityVerdict(status="inconclusive", evidence=evidence, confidence="sampled")

"""Sampled certification of L_f h >= -mu(h) over the whole box."""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from invariant_kit.certify.problem import BarrierProblem
from invariant_kit.config import settings
from invariant_kit.minfunc import MuCandidate, classify
from invariant_kit.models import MinimalityVerdict

logger = logging.getLogger(__name__)

VERDICTS = ("certified", "violated", "certified_modulo_classification", "mu_not_minimal")


@dataclass
class CertificationReport:
    """Per-sample margins and the combined verdict."""

    state_names: tuple[str, ...]
    points: np.ndarray  # (N, n) states
    times: Optional[np.ndarray]
    h_values: np.ndarray
    lfh: np.ndarray
    margins: np.ndarray
    tol: float
    verdict: str
    mu_verdict: MinimalityVerdict
    min_margin: float
    argmin_index: int
    witness: Optional[dict[str, Any]] = None
    min_margin_on_S: Optional[float] = None
    holds_only_on_S: bool = False
    empty_S: bool = False
    nondifferentiable_points: int = 0
    boundary_checks: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    @property
    def argmin_point(self) -> list[float]:
        return [float(v) for v in self.points[self.argmin_index]]

    def samples_table(self) -> tuple[list[str], np.ndarray]:
        """Header and rows for CSV export: x..., [t], h, Lfh, margin."""
        header = list(self.state_names)
        columns = [self.points]
        if self.times is not None:
            header.append("t")
            columns.append(self.times.reshape(-1, 1))
        header += ["h", "Lfh", "margin"]
        columns += [self.h_values.reshape(-1, 1), self.lfh.reshape(-1, 1), self.margins.reshape(-1, 1)]
        return header, np.hstack(columns)

    def summary(self) -> dict[str, Any]:
        data = {
            "verdict": self.verdict,
            "scope": "certified on sampled box",
            "tol": self.tol,
            "sample_count": int(len(self.margins)),
            "min_margin": self.min_margin,
            "argmin_point": self.argmin_point,
            "witness": self.witness,
            "min_margin_on_S": self.min_margin_on_S,
            "holds_only_on_S": self.holds_only_on_S,
            "empty_S": self.empty_S,
            "nondifferentiable_points": self.nondifferentiable_points,
            "mu_verdict": self.mu_verdict.model_dump(),
            "warnings": list(self.warnings),
        }
        if self.times is not None:
            data["argmin_time"] = float(self.times[self.argmin_index])
        if self.boundary_checks:
            data["boundary_checks"] = self.boundary_checks
        return data


def _combine(min_margin: float, tol: float, mu_verdict: MinimalityVerdict) -> str:
    if min_margin < -tol:
        return "violated"
    if mu_verdict.status == "minimal":
        return "certified"
    if mu_verdict.status == "not_minimal":
        return "mu_not_minimal"
    return "certified_modulo_classification"


def build_report(
    prob: BarrierProblem,
    tol: float,
    mu_verdict: MinimalityVerdict,
    input_gain: Optional[np.ndarray] = None,
) -> CertificationReport:
    """Margins L_f h [+ input_gain] + mu(h) on the sample grid and the verdict on them."""
    points, times = prob.sample_points()
    lie = prob.lie(points)
    drift = lie.lfh if input_gain is None else lie.lfh + input_gain
    margins = drift + prob.mu_values(lie.h, times)

    # np.argmin returns the first index on ties
    index = int(np.argmin(margins))
    min_margin = float(margins[index])
    verdict = _combine(min_margin, tol, mu_verdict)
    states = points[:, : prob.dimension]

    report = CertificationReport(
        state_names=prob.state_names,
        points=states,
        times=times,
        h_values=lie.h,
        lfh=lie.lfh,
        margins=margins,
        tol=tol,
        verdict=verdict,
        mu_verdict=mu_verdict,
        min_margin=min_margin,
        argmin_index=index,
    )

    in_S = lie.h >= 0
    if in_S.any():
        report.min_margin_on_S = float(margins[in_S].min())
        report.holds_only_on_S = verdict == "violated" and report.min_margin_on_S >= -tol
    else:
        report.empty_S = True
        report.warnings.append("h < 0 at every grid point: S looks empty")
        logger.warning("h < 0 at every grid point; invariance of an empty set is vacuous")

    flagged = int(np.count_nonzero(lie.nondifferentiable))
    if flagged:
        report.nondifferentiable_points = flagged
        report.warnings.append(f"h is not differentiable at {flagged} grid point(s); one-sided derivatives used")
        logger.warning(f"h is not differentiable at {flagged} grid point(s)")

    if verdict == "violated":
        report.witness = {"x": report.argmin_point, "margin": min_margin}
        if times is not None:
            report.witness["t"] = float(times[index])
    if report.holds_only_on_S:
        report.warnings.append("inequality holds on S but fails outside it; it must hold on the whole domain")

    logger.info(f"Barrier check: {verdict} (min margin {min_margin:.3e} over {len(margins)} samples)")
    return report


def check_mbf(
    prob: BarrierProblem,
    tol: Optional[float] = None,
    mu_verdict: Optional[MinimalityVerdict] = None,
) -> CertificationReport:
    """Check L_f h(x) + mu(h(x)) >= -tol at every grid point of the box.

    The verdict is certified only when the inequality holds and mu is
    classified minimal.
    """
    if prob.time_varying:
        raise ValueError("Use check_tmbf for time-varying problems")
    if not isinstance(prob.mu, MuCandidate):
        raise ValueError("check_mbf needs mu as a MuCandidate")
    tol = tol if tol is not None else settings.certify_tol
    if mu_verdict is None:
        mu_verdict = classify(prob.mu)
    return build_report(prob, tol, mu_verdict)


def classify_time_varying(prob: BarrierProblem, zero: Optional[float] = None) -> MinimalityVerdict:
    """Sufficient test: mu(t, 0) <= 0 on the time grid plus declared uniqueness."""
    if isinstance(prob.mu, MuCandidate):
        return classify(prob.mu)
    zero = zero if zero is not None else settings.zero_threshold
    times = prob.time.samples()
    if prob.mu.variables == ("t", "w"):
        at_zero = prob.mu.eval_many(np.column_stack([times, np.zeros_like(times)]))
    else:
        at_zero = prob.mu.eval_many(np.zeros((1, 1)))
    max_at_zero = float(np.max(at_zero))
    evidence: dict[str, Any] = {"max_mu_t0": max_at_zero, "time_samples": len(times)}
    if prob.declared.note:
        evidence["note"] = prob.declared.note
    if max_at_zero > zero:
        evidence["reason"] = "mu(t, 0) > 0 at a sampled time; the sufficient condition does not apply"
        return MinimalityVerdict(status="inconclusive", evidence=evidence, confidence="sampled")
    if not prob.declared.locally_lipschitz:
        evidence["reason"] = "uniqueness of solutions was not declared"
        return MinimalityVerdict(status="inconclusive", evidence=evidence, confidence="sampled")
    return MinimalityVerdict(status="minimal", case="corollary1", evidence=evidence, confidence="sampled")


def check_tmbf(
    prob: BarrierProblem,
    tol: Optional[float] = None,
    mu_verdict: Optional[MinimalityVerdict] = None,
) -> CertificationReport:
    """Check dh/dt + L_f h + mu(t, h) >= -tol on the product of time and state grids."""
    if not prob.time_varying:
        raise ValueError("check_tmbf needs f and h to take 't'")
    tol = tol if tol is not None else settings.certify_tol
    if mu_verdict is None:
        mu_verdict = classify_time_varying(prob)
    return build_report(prob, tol, mu_verdict)

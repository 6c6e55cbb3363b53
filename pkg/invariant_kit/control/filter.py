"""QP safety filter, strict-interior test, continuity scans and MCBF certification."""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from invariant_kit.certify import CertificationReport, lg_h
from invariant_kit.certify.barrier import build_report
from invariant_kit.config import settings
from invariant_kit.control.problem import ControlProblem, ViableSet
from invariant_kit.control.qp import chebyshev_center, solve_lp_by_vertices, solve_projection_qp
from invariant_kit.minfunc import classify
from invariant_kit.models import MinimalityVerdict, SafeControlResult
from invariant_kit.parallel import parallel_map

logger = logging.getLogger(__name__)


def viable_set_row(prob: ControlProblem, x: Sequence[float]) -> ViableSet:
    """Stacked system G = [A; -L_g h], d = [b; mu(h) + L_f h] with row labels."""
    return prob.viable_set(x)


def strict_interior_nonempty(prob: ControlProblem, x: Sequence[float], slack: Optional[float] = None) -> bool:
    slack = slack if slack is not None else settings.interior_slack
    viable = prob.viable_set(x)
    margin, _ = chebyshev_center(viable.G, viable.d)
    return margin > slack


def qp_filter(
    prob: ControlProblem,
    x: Sequence[float],
    check_interior: bool = True,
    check_kkt: Optional[bool] = None,
) -> SafeControlResult:
    """Closest input to k_nom(x) inside K(x)."""
    viable = prob.viable_set(x)
    target = prob.k_nom.eval(x)
    solution = solve_projection_qp(viable.G, viable.d, target, check_kkt=check_kkt)
    interior = None
    if check_interior:
        margin, _ = chebyshev_center(viable.G, viable.d)
        interior = margin > settings.interior_slack

    if not solution.feasible:
        logger.debug(f"K(x) empty at x={list(x)}")
        return SafeControlResult(
            feasible=False,
            strict_interior_nonempty=interior,
            barrier_row=viable.barrier_row,
            certificate=[float(v) for v in solution.certificate],
        )
    return SafeControlResult(
        feasible=True,
        u=[float(v) for v in solution.u],
        active_set=list(solution.active_set),
        active_labels=[viable.labels[i] for i in solution.active_set],
        objective=solution.objective,
        multipliers=[float(v) for v in solution.multipliers],
        strict_interior_nonempty=interior,
        barrier_row=viable.barrier_row,
        degenerate=solution.degenerate,
    )


@dataclass
class ContinuityScan:
    """Filter outputs along a path and the difference quotients between neighbours."""

    points: np.ndarray
    results: list[SafeControlResult]
    quotients: np.ndarray  # len(points) - 1, NaN next to infeasible points

    @property
    def max_quotient(self) -> float:
        finite = self.quotients[np.isfinite(self.quotients)]
        return float(finite.max()) if len(finite) else 0.0

    @property
    def infeasible_indices(self) -> list[int]:
        return [i for i, result in enumerate(self.results) if not result.feasible]

    @property
    def interior_empty_indices(self) -> list[int]:
        return [i for i, result in enumerate(self.results) if result.strict_interior_nonempty is False]

    def table(self) -> tuple[list[str], list[list[Any]]]:
        """Header and rows for CSV: x..., u..., active_set, jump_quotient, strict_interior."""
        n = self.points.shape[1]
        m = next((len(r.u) for r in self.results if r.u is not None), 0)
        header = [f"x{i + 1}" for i in range(n)] + [f"u{j + 1}" for j in range(m)]
        header += ["active_set", "jump_quotient", "strict_interior"]
        rows = []
        for i, (point, result) in enumerate(zip(self.points, self.results)):
            controls = [float(v) for v in result.u] if result.u is not None else [float("nan")] * m
            quotient = float(self.quotients[i - 1]) if i > 0 else float("nan")
            active = " ".join(str(j) for j in result.active_set) if result.feasible else "infeasible"
            rows.append([float(v) for v in point] + controls + [active, quotient, result.strict_interior_nonempty])
        return header, rows

    def summary(self) -> dict[str, Any]:
        return {
            "points": int(len(self.points)),
            "max_jump_quotient": self.max_quotient,
            "infeasible_points": [[float(v) for v in self.points[i]] for i in self.infeasible_indices],
            "interior_empty_points": [[float(v) for v in self.points[i]] for i in self.interior_empty_indices],
        }


def continuity_scan(prob: ControlProblem, path: np.ndarray, threads: Optional[int] = None) -> ContinuityScan:
    """Empirical Lipschitz quotients of the filter along a sampled curve.

    Points where the strict interior of K(x) is empty are flagged; continuity
    of the filter is only guaranteed away from them.
    """
    path = np.atleast_2d(np.asarray(path, dtype=float))
    if path.shape[1] != prob.n:
        path = path.reshape(-1, prob.n)
    results = parallel_map(lambda x: qp_filter(prob, x), list(path), threads)

    quotients = np.full(max(len(path) - 1, 0), np.nan)
    for i in range(len(path) - 1):
        left, right = results[i], results[i + 1]
        if left.feasible and right.feasible:
            step = np.linalg.norm(path[i + 1] - path[i])
            jump = np.linalg.norm(np.subtract(right.u, left.u))
            quotients[i] = jump / step if step > 0 else np.nan

    scan = ContinuityScan(path, results, quotients)
    if scan.infeasible_indices:
        logger.warning(f"Safety filter infeasible at {len(scan.infeasible_indices)} path point(s)")
    if scan.interior_empty_indices:
        logger.warning(f"Strict interior of K(x) empty at {len(scan.interior_empty_indices)} path point(s)")
    logger.info(f"Continuity scan over {len(path)} points: max jump quotient {scan.max_quotient:.6g}")
    return scan


@dataclass
class ControlCertificationReport(CertificationReport):
    """CertificationReport plus the per-point supremum over U(x) of L_g h u."""

    sup_values: Optional[np.ndarray] = None
    unbounded_points: int = 0
    empty_input_set_points: int = 0
    interior_empty_points: Optional[list[list[float]]] = None

    def summary(self) -> dict[str, Any]:
        data = super().summary()
        data.update(
            {
                "unbounded_points": self.unbounded_points,
                "empty_input_set_points": self.empty_input_set_points,
                "interior_empty_points": self.interior_empty_points,
                "compactness_of_inputs": "assumed, not checked",
            }
        )
        return data


def _input_supremum(lgh: np.ndarray, A: np.ndarray, b: np.ndarray) -> tuple[float, str]:
    if A.shape[0] == 0:
        if not np.any(lgh):
            return 0.0, "optimal"
        return np.inf, "unbounded"
    solution = solve_lp_by_vertices(lgh, A, b)
    return solution.value, solution.status


def check_mcbf(
    prob: ControlProblem,
    tol: Optional[float] = None,
    check_interior: bool = True,
    mu_verdict: Optional[MinimalityVerdict] = None,
    threads: Optional[int] = None,
) -> ControlCertificationReport:
    """Check L_f h + sup_{u in U(x)} L_g h u >= -mu(h) - tol over the grid."""
    tol = tol if tol is not None else settings.certify_tol
    drift = prob.drift_problem()
    if mu_verdict is None:
        mu_verdict = classify(prob.mu)

    points = prob.domain.points()
    lie = drift.lie(points)
    lgh = lg_h(lie.gradients, prob.g.eval_many(points))
    A = prob.A.eval_many(points)
    b = prob.b.eval_many(points)

    solved = parallel_map(lambda i: _input_supremum(lgh[i], A[i], b[i]), range(len(points)), threads)
    sup_values = np.array([value for value, _ in solved])
    statuses = [status for _, status in solved]

    base = build_report(drift, tol, mu_verdict, input_gain=sup_values)
    report = ControlCertificationReport(**vars(base), sup_values=sup_values)
    report.unbounded_points = statuses.count("unbounded")
    report.empty_input_set_points = statuses.count("infeasible")
    if report.unbounded_points:
        report.warnings.append(f"U(x) unbounded in the ascent direction at {report.unbounded_points} point(s)")
        logger.warning(f"sup over U(x) is +inf at {report.unbounded_points} grid point(s); condition holds there")
    if report.empty_input_set_points:
        report.warnings.append(f"U(x) empty at {report.empty_input_set_points} point(s)")
        logger.warning(f"U(x) is empty at {report.empty_input_set_points} grid point(s)")

    if check_interior:
        flags = parallel_map(lambda x: strict_interior_nonempty(prob, x), list(points), threads)
        report.interior_empty_points = [[float(v) for v in points[i]] for i, ok in enumerate(flags) if not ok]
        if report.interior_empty_points:
            logger.info(
                f"Strict interior of K(x) empty at {len(report.interior_empty_points)} grid point(s); "
                "a continuous selection is not guaranteed there"
            )
    return report

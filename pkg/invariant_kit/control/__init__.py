"""Minimal control barrier functions and the QP safety filter."""

from .filter import (
    ContinuityScan,
    ControlCertificationReport,
    check_mcbf,
    continuity_scan,
    qp_filter,
    strict_interior_nonempty,
    viable_set_row,
)
from .problem import MAX_INPUT_ROWS, MAX_INPUTS, ControlProblem, ViableSet
from .qp import (
    LPSolution,
    QPSolution,
    chebyshev_center,
    farkas_certificate,
    kkt_residual,
    solve_lp_by_vertices,
    solve_projection_qp,
    verify_kkt,
)

__all__ = [
    "ContinuityScan",
    "ControlCertificationReport",
    "check_mcbf",
    "continuity_scan",
    "qp_filter",
    "strict_interior_nonempty",
    "viable_set_row",
    "MAX_INPUT_ROWS",
    "MAX_INPUTS",
    "ControlProblem",
    "ViableSet",
    "LPSolution",
    "QPSolution",
    "chebyshev_center",
    "farkas_certificate",
    "kkt_residual",
    "solve_lp_by_vertices",
    "solve_projection_qp",
    "verify_kkt",
]

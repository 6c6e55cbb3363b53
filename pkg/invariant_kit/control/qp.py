"""Exact small-scale QP and LP solves by active-set enumeration.

Problems here have at most 8 variables and 17 rows, so every candidate active
set is visited and the result does not depend on an iteration path.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal, Optional

import numpy as np

from invariant_kit.config import settings
from invariant_kit.errors import SolverError

logger = logging.getLogger(__name__)

# objectives closer than this are treated as ties
TIE_TOL = 1e-12
# rank cutoff relative to the largest singular value
RANK_RTOL = 1e-10


def _rank(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    return int(np.linalg.matrix_rank(matrix, tol=RANK_RTOL * max(1.0, np.abs(matrix).max())))


@dataclass
class QPSolution:
    """Minimiser of ||u - target||^2 subject to G u <= d, or a proof of emptiness."""

    feasible: bool
    u: Optional[np.ndarray] = None
    active_set: tuple[int, ...] = ()
    multipliers: Optional[np.ndarray] = None
    objective: Optional[float] = None
    degenerate: bool = False
    certificate: Optional[np.ndarray] = None


def _solve_active(G_S: np.ndarray, d_S: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    """Least-distance point on {G_S u = d_S}; multipliers from the normal equations."""
    gram = G_S @ G_S.T
    rhs = G_S @ target - d_S
    degenerate = _rank(G_S) < len(d_S)
    if degenerate:
        lam = np.linalg.pinv(gram) @ rhs
    else:
        lam = np.linalg.solve(gram, rhs)
    return target - G_S.T @ lam, lam, degenerate


def kkt_residual(G: np.ndarray, d: np.ndarray, target: np.ndarray, solution: QPSolution) -> dict[str, float]:
    """Stationarity, dual, primal and complementarity residuals of a solution."""
    active = list(solution.active_set)
    lam = solution.multipliers[active] if active else np.zeros(0)
    stationarity = solution.u - target + G[active].T @ lam if active else solution.u - target
    slack = G @ solution.u - d
    return {
        "stationarity": float(np.abs(stationarity).max(initial=0.0)),
        "dual": float(-min(lam.min(initial=0.0), 0.0)),
        "primal": float(max(slack.max(initial=0.0), 0.0)),
        "complementarity": float(np.abs(slack[active]).max(initial=0.0)),
    }


def verify_kkt(G: np.ndarray, d: np.ndarray, target: np.ndarray, solution: QPSolution, tol: float = 1e-8) -> None:
    residual = kkt_residual(G, d, target, solution)
    if any(value > tol for value in residual.values()):
        raise SolverError(f"KKT certificate failed: {residual}")
    logger.debug(f"KKT residuals {residual}")


def farkas_certificate(G: np.ndarray, d: np.ndarray, tol: float = 1e-9) -> Optional[np.ndarray]:
    """y >= 0 with G^T y = 0 and d.y < 0, proving {u : G u <= d} is empty.

    Minimal infeasible subsystems have at most m + 1 rows and a one-dimensional
    left null space, so subsets up to that size are searched in order.
    """
    k, m = G.shape
    for size in range(1, min(k, m + 1) + 1):
        for subset in combinations(range(k), size):
            rows = list(subset)
            G_S = G[rows]
            if _rank(G_S) != size - 1:
                continue
            _, _, vt = np.linalg.svd(G_S.T, full_matrices=True)
            y_S = vt[-1]
            y_S = y_S / np.abs(y_S).max()
            if y_S.sum() < 0:
                y_S = -y_S
            if np.any(y_S < -tol) or np.abs(G_S.T @ y_S).max(initial=0.0) > tol:
                continue
            y_S = np.clip(y_S, 0.0, None)
            if d[rows] @ y_S < -tol:
                y = np.zeros(k)
                y[rows] = y_S
                return y
    return None


def solve_projection_qp(
    G: np.ndarray,
    d: np.ndarray,
    target: np.ndarray,
    primal_tol: Optional[float] = None,
    dual_tol: Optional[float] = None,
    check_kkt: Optional[bool] = None,
) -> QPSolution:
    """Project target onto {u : G u <= d} by enumerating active sets of size <= m.

    Ties in the objective go to the lexicographically smallest active set.
    Raises SolverError when no candidate is feasible and no Farkas
    certificate is found either.
    """
    d = np.asarray(d, dtype=float).reshape(-1)
    target = np.asarray(target, dtype=float).reshape(-1)
    k, m = len(d), len(target)
    G = np.asarray(G, dtype=float).reshape(k, m)
    primal_tol = primal_tol if primal_tol is not None else settings.primal_tol
    dual_tol = dual_tol if dual_tol is not None else settings.dual_tol
    check_kkt = check_kkt if check_kkt is not None else settings.debug_kkt

    candidates = []
    for size in range(0, min(k, m) + 1):
        for subset in combinations(range(k), size):
            rows = list(subset)
            if rows:
                u, lam, degenerate = _solve_active(G[rows], d[rows], target)
            else:
                u, lam, degenerate = target.copy(), np.zeros(0), False
            if not np.all(np.isfinite(u)):
                continue
            if k and np.any(G @ u > d + primal_tol):
                continue
            if np.any(lam < dual_tol):
                continue
            objective = float(np.sum((u - target) ** 2))
            candidates.append((objective, subset, u, lam, degenerate))

    if not candidates:
        certificate = farkas_certificate(G, d)
        if certificate is None:
            raise SolverError(f"No feasible active set and no emptiness certificate for {k} rows")
        logger.debug(f"Constraint set empty; certificate {certificate}")
        return QPSolution(feasible=False, certificate=certificate)

    best = min(candidate[0] for candidate in candidates)
    objective, subset, u, lam, degenerate = min(
        (c for c in candidates if c[0] <= best + TIE_TOL), key=lambda c: c[1]
    )
    multipliers = np.zeros(k)
    multipliers[list(subset)] = lam
    if degenerate:
        logger.warning(f"Rank-deficient active set {subset}; pseudo-inverse multipliers used")
    solution = QPSolution(True, u, subset, multipliers, objective, degenerate)
    if check_kkt:
        verify_kkt(G, d, target, solution)
    return solution


@dataclass
class LPSolution:
    """max c.x over {x : G x <= d}, with the vertex reached."""

    status: Literal["optimal", "infeasible", "unbounded"]
    value: float
    x: Optional[np.ndarray] = None
    active_set: tuple[int, ...] = field(default=())


def _box_rows(m: int, bound: float) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(m)
    return np.vstack([eye, -eye]), np.full(2 * m, bound)


def _best_vertex(c: np.ndarray, G: np.ndarray, d: np.ndarray, tol: float) -> Optional[tuple[float, tuple[int, ...], np.ndarray]]:
    m = G.shape[1]
    best = None
    for subset in combinations(range(len(d)), m):
        rows = list(subset)
        G_S = G[rows]
        if _rank(G_S) < m:
            continue
        x = np.linalg.solve(G_S, d[rows])
        if np.any(G @ x > d + tol * np.maximum(1.0, np.abs(d))):
            continue
        value = float(c @ x)
        if best is None or value > best[0] + TIE_TOL:
            best = (value, subset, x)
    return best


def solve_lp_by_vertices(
    c: np.ndarray,
    G: np.ndarray,
    d: np.ndarray,
    bound: float = 1e6,
    tol: Optional[float] = None,
) -> LPSolution:
    """Maximise c.x over {G x <= d} by enumerating vertices inside a box.

    The box |x_j| <= bound makes the region pointed; repeating the solve in a
    box twice as large exposes a supremum that is really unbounded.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    m = len(c)
    G = np.asarray(G, dtype=float).reshape(-1, m)
    d = np.asarray(d, dtype=float).reshape(-1)
    tol = tol if tol is not None else settings.primal_tol

    box_G, box_d = _box_rows(m, bound)
    best = _best_vertex(c, np.vstack([G, box_G]), np.concatenate([d, box_d]), tol)
    if best is None:
        return LPSolution("infeasible", -np.inf)
    value, subset, x = best

    wide_G, wide_d = _box_rows(m, 2.0 * bound)
    wider = _best_vertex(c, np.vstack([G, wide_G]), np.concatenate([d, wide_d]), tol)
    if wider is not None and wider[0] > value + tol * max(1.0, abs(value)):
        return LPSolution("unbounded", np.inf, x, subset)
    return LPSolution("optimal", value, x, subset)


def chebyshev_center(G: np.ndarray, d: np.ndarray, bound: float = 1e6) -> tuple[float, Optional[np.ndarray]]:
    """Largest s with G u + s*max(|G_i|, 1) <= d and s <= 1, and the centre u.

    Rows with a zero normal turn into s <= d_i, so a positive margin means
    every row, including such rows, holds strictly at the centre.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    d = np.asarray(d, dtype=float).reshape(-1)
    m = G.shape[1]
    scale = np.maximum(np.linalg.norm(G, axis=1), 1.0)
    lifted = np.vstack([np.column_stack([G, scale]), np.append(np.zeros(m), 1.0)])
    rhs = np.append(d, 1.0)
    objective = np.append(np.zeros(m), 1.0)
    solution = solve_lp_by_vertices(objective, lifted, rhs, bound=bound)
    if solution.status != "optimal":
        return -np.inf, None
    return solution.value, solution.x[:m]

"""Adaptive Simpson quadrature for the divergence test."""

import logging
import math
from typing import Callable

logger = logging.getLogger(__name__)


def _simpson(fa: float, fm: float, fb: float, half_width: float) -> float:
    return half_width / 3.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> tuple[float, float]:
    """Integrate f over [a, b] to absolute tolerance tol.

    Iterative form of the recursive rule: a panel is accepted when its two
    halves agree with the whole to 15*tol, and the Richardson correction is
    added. Returns (integral, error_estimate).
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, error = adaptive_simpson(f, b, a, tol, max_depth)
        return -value, error

    lo, hi = a, b
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    pending = [(a, b, fa, fm, fb, _simpson(fa, fm, fb, 0.5 * (b - a)), tol, 0)]
    pieces: list[float] = []
    errors: list[float] = []
    hit_depth = False

    while pending:
        a, b, fa, fm, fb, whole, panel_tol, depth = pending.pop()
        m = 0.5 * (a + b)
        h = 0.5 * (b - a)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(fa, flm, fm, 0.5 * h)
        right = _simpson(fm, frm, fb, 0.5 * h)
        delta = left + right - whole

        if abs(delta) <= 15.0 * panel_tol or depth >= max_depth:
            if depth >= max_depth:
                hit_depth = True
            pieces.append(left + right + delta / 15.0)
            errors.append(abs(delta) / 15.0)
        else:
            # right half first so the left half is processed next
            pending.append((m, b, fm, frm, fb, right, 0.5 * panel_tol, depth + 1))
            pending.append((a, m, fa, flm, fm, left, 0.5 * panel_tol, depth + 1))

    if hit_depth:
        logger.warning(f"Simpson reached depth {max_depth} on [{lo:.6g}, {hi:.6g}]; tolerance not met")
    return math.fsum(pieces), math.fsum(errors)

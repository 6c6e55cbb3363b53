"""Classical fixed-step Runge-Kutta integration shared by comparison and sim."""

from typing import Callable, TypeVar

import numpy as np

State = TypeVar("State", float, np.ndarray)


def time_grid(t_end: float, step: float) -> np.ndarray:
    """Uniform grid 0, step, 2*step, ... with round(t_end/step) intervals."""
    if step <= 0 or t_end <= 0:
        raise ValueError(f"Need t_end > 0 and step > 0, got t_end={t_end}, step={step}")
    n_steps = max(1, int(round(t_end / step)))
    return np.arange(n_steps + 1) * step


def rk4_step(rhs: Callable[[float, State], State], t: float, y: State, dt: float) -> State:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_scalar(
    rhs: Callable[[float, float], float],
    y0: float,
    times: np.ndarray,
    floor: float = -np.inf,
) -> tuple[np.ndarray, int | None]:
    """Integrate a scalar ODE over times.

    Returns the samples and the index of the first sample that fell below
    ``floor`` (or stopped being finite), in which case the remaining samples
    are NaN.
    """
    values = np.full(len(times), np.nan)
    y = float(y0)
    values[0] = y
    for i in range(1, len(times)):
        y = rk4_step(rhs, float(times[i - 1]), y, float(times[i] - times[i - 1]))
        if not np.isfinite(y) or y < floor:
            return values, i
        values[i] = y
    return values, None

"""Fixed-step RK4 trajectories of open and closed loops."""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol, Sequence

import numpy as np

from invariant_kit.control import ControlProblem, qp_filter
from invariant_kit.errors import DomainError, QPInfeasibleAtState
from invariant_kit.expr import ExprFunction, VectorExprFunction
from invariant_kit.models import BoxDomain
from invariant_kit.parallel import parallel_map
from invariant_kit.rk4 import rk4_step, time_grid

logger = logging.getLogger(__name__)


class Dynamics(Protocol):
    """Right-hand side x' = F(t, x), optionally reporting the input used."""

    state_names: tuple[str, ...]

    def evaluate(self, t: float, x: np.ndarray) -> tuple[np.ndarray, Optional[np.ndarray]]: ...


def _point(variables: Sequence[str], t: float, x: np.ndarray) -> list[float]:
    values = [float(v) for v in x]
    return values + [t] if variables and variables[-1] == "t" else values


@dataclass(frozen=True)
class OpenLoop:
    """x' = f(x) or f(x, t)."""

    f: VectorExprFunction

    @property
    def state_names(self) -> tuple[str, ...]:
        variables = self.f.variables
        return variables[:-1] if variables and variables[-1] == "t" else variables

    def evaluate(self, t: float, x: np.ndarray) -> tuple[np.ndarray, None]:
        return self.f.eval(_point(self.f.variables, t, x)), None


@dataclass(frozen=True)
class ClosedLoop:
    """x' = f(x) + g(x) k(x) with k the QP safety filter, solved at every call."""

    prob: ControlProblem

    @property
    def state_names(self) -> tuple[str, ...]:
        return self.prob.h.variables

    def evaluate(self, t: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        result = qp_filter(self.prob, x, check_interior=False)
        if not result.feasible:
            raise QPInfeasibleAtState(t, x)
        u = np.asarray(result.u)
        return self.prob.f.eval(x) + self.prob.g.eval(x) @ u, u


@dataclass
class Trajectory:
    """Samples of one integration, truncated where it left the box or failed."""

    state_names: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    h_values: np.ndarray
    controls: Optional[np.ndarray] = None  # (len(times), m), input at the first RK4 stage
    exit_time: Optional[float] = None
    events: list[tuple[float, str]] = field(default_factory=list)

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def table(self) -> tuple[list[str], list[list[Any]]]:
        """Header and rows for CSV: t, x..., h, u..., event."""
        m = 0 if self.controls is None else self.controls.shape[1]
        header = ["t", *self.state_names, "h"] + [f"u{j + 1}" for j in range(m)] + ["event"]
        marks = {}
        for t, kind in self.events:
            marks.setdefault(t, kind)
        rows = []
        for i, t in enumerate(self.times):
            row = [float(t)] + [float(v) for v in self.states[i]] + [float(self.h_values[i])]
            if m:
                row += [float(v) for v in self.controls[i]]
            row.append(marks.get(float(t), ""))
            rows.append(row)
        return header, rows

    def summary(self) -> dict[str, Any]:
        return {
            "x0": [float(v) for v in self.x0],
            "final_time": float(self.times[-1]),
            "final_state": [float(v) for v in self.final_state],
            "min_h": float(np.min(self.h_values)),
            "exit_time": self.exit_time,
            "events": [{"t": t, "kind": kind} for t, kind in self.events],
        }


def integrate(
    dynamics: Dynamics,
    h: ExprFunction,
    x0: Sequence[float],
    T: float,
    dt: float,
    domain: Optional[BoxDomain] = None,
    strict: bool = False,
) -> Trajectory:
    """Classical RK4 from x0 over [0, T] with step dt.

    A step that leaves the domain box truncates the trajectory and sets
    exit_time. Filter infeasibility and expression domain errors end the
    trajectory with an event, or raise when ``strict``.
    """
    x = np.asarray(x0, dtype=float).reshape(-1)
    if domain is not None and not domain.contains(x):
        raise ValueError(f"x0={list(x)} is outside the domain box")
    times = time_grid(T, dt)

    stage_inputs: list[Optional[np.ndarray]] = []

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        dx, u = dynamics.evaluate(t, y)
        stage_inputs.append(u)
        return dx

    states = [x]
    controls: list[Optional[np.ndarray]] = []
    events: list[tuple[float, str]] = []
    exit_time = None
    completed = True

    for i in range(1, len(times)):
        t = float(times[i - 1])
        stage_inputs.clear()
        try:
            y = rk4_step(rhs, t, x, float(times[i] - times[i - 1]))
        except QPInfeasibleAtState:
            events.append((t, "qp_infeasible"))
            logger.warning(f"Safety filter infeasible during step from t={t:.6g}")
            if strict:
                raise
            completed = False
            break
        except DomainError:
            events.append((t, "domain_error"))
            logger.warning(f"Expression domain error during step from t={t:.6g}")
            if strict:
                raise
            completed = False
            break
        controls.append(stage_inputs[0] if stage_inputs else None)
        if not np.all(np.isfinite(y)) or (domain is not None and not domain.contains(y)):
            exit_time = float(times[i])
            events.append((exit_time, "domain_exit"))
            logger.debug(f"Trajectory left the domain at t={exit_time:.6g}")
            completed = False
            break
        states.append(y)
        x = y

    n_samples = len(states)
    if len(controls) < n_samples:
        # input at the last kept state
        u_last = controls[-1] if controls else None
        if completed:
            t_last = float(times[n_samples - 1])
            try:
                _, u_last = dynamics.evaluate(t_last, x)
            except (QPInfeasibleAtState, DomainError) as e:
                kind = "qp_infeasible" if isinstance(e, QPInfeasibleAtState) else "domain_error"
                events.append((t_last, kind))
                logger.warning(f"Input at the final state t={t_last:.6g} failed: {kind}")
                if strict:
                    raise
        controls.append(u_last)
    controls = controls[:n_samples]

    times = times[:n_samples]
    state_array = np.vstack(states)
    if h.variables and h.variables[-1] == "t":
        h_values = h.eval_many(np.column_stack([state_array, times]))
    else:
        h_values = h.eval_many(state_array)

    control_array = None
    if controls and all(u is not None for u in controls):
        control_array = np.vstack(controls)
    return Trajectory(dynamics.state_names, times, state_array, h_values, control_array, exit_time, events)


def simulate_many(
    dynamics: Dynamics,
    h: ExprFunction,
    x0s: Sequence[Sequence[float]],
    T: float,
    dt: float,
    domain: Optional[BoxDomain] = None,
    threads: Optional[int] = None,
) -> list[Trajectory]:
    """Independent trajectories on the worker pool, returned in input order."""
    return parallel_map(lambda x0: integrate(dynamics, h, x0, T, dt, domain), list(x0s), threads)


def random_initial_states(
    domain: BoxDomain,
    h: ExprFunction,
    count: int,
    seed: Optional[int] = None,
    max_draws: int = 1_000_000,
) -> np.ndarray:
    """Rejection-sample grid points with h >= 0."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    grid = domain.points()
    if h.variables and h.variables[-1] == "t":
        in_S = h.eval_many(np.column_stack([grid, np.zeros(len(grid))])) >= 0
    else:
        in_S = h.eval_many(grid) >= 0
    if not in_S.any():
        raise ValueError("No grid point satisfies h >= 0")

    accepted: list[int] = []
    draws = 0
    while len(accepted) < count:
        if draws >= max_draws:
            raise ValueError(f"Rejection sampling drew {draws} points without filling {count}")
        batch = rng.integers(0, len(grid), size=max(count, 64))
        draws += len(batch)
        accepted.extend(int(i) for i in batch if in_S[i])
    return grid[accepted[:count]]

"""Barrier problems and the vectorised Lie derivatives shared with control."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from invariant_kit.expr import ExprFunction, ScalarFunction, VectorExprFunction
from invariant_kit.minfunc import MuCandidate
from invariant_kit.models import BoxDomain, DeclaredProperties, TimeDomain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LieSample:
    """h, grad h and L_f h at a batch of points."""

    h: np.ndarray
    gradients: np.ndarray  # (N, n_vars), the time partial last when present
    lfh: np.ndarray
    nondifferentiable: np.ndarray


def lie_derivatives(
    h: ExprFunction,
    f: VectorExprFunction,
    points: np.ndarray,
    time_varying: bool = False,
) -> LieSample:
    """L_f h = grad_x h . f, plus dh/dt when h and f take t as last variable."""
    batch = h.grad_many(points)
    field_values = f.eval_many(points)
    n = field_values.shape[1]
    lfh = np.einsum("ij,ij->i", batch.gradients[:, :n], field_values)
    if time_varying:
        lfh = lfh + batch.gradients[:, n]
    return LieSample(batch.values, batch.gradients, lfh, batch.nondifferentiable)


def lg_h(gradients: np.ndarray, g_values: np.ndarray) -> np.ndarray:
    """Rows grad h(x) . g(x), shape (N, m)."""
    n = g_values.shape[1]
    return np.einsum("ij,ijk->ik", gradients[:, :n], g_values)


@dataclass(frozen=True)
class BarrierProblem:
    """Dynamics x' = f, barrier h and comparison function mu over a sampled box.

    For time-varying problems f and h take the state variables followed by
    ``t``, and mu is a function of (t, w); a time-invariant mu may still be
    given as a MuCandidate.
    """

    f: VectorExprFunction
    h: ExprFunction
    mu: Union[MuCandidate, ScalarFunction]
    domain: BoxDomain
    time: Optional[TimeDomain] = None
    declared: DeclaredProperties = field(default_factory=DeclaredProperties)

    def __post_init__(self):
        if self.f.variables != self.h.variables:
            raise ValueError(f"f and h must share variables, got {self.f.variables} and {self.h.variables}")
        n = self.domain.dimension
        if self.f.shape != (n,):
            raise ValueError(f"f must have {n} components, got shape {self.f.shape}")
        expected = n + (1 if self.time_varying else 0)
        if len(self.h.variables) != expected:
            raise ValueError(f"Expected {expected} variables, got {self.h.variables}")
        if self.time is not None and not self.time_varying:
            raise ValueError("A time block needs f and h to take 't' as their last variable")
        if self.time_varying and self.time is None:
            raise ValueError("Time-varying problems need a time block")
        if not isinstance(self.mu, MuCandidate) and self.mu.variables not in (("t", "w"), ("w",)):
            raise ValueError(f"mu must take (w) or (t, w), got {self.mu.variables}")

    @property
    def time_varying(self) -> bool:
        return self.h.variables[-1] == "t"

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def state_names(self) -> tuple[str, ...]:
        return self.h.variables[: self.dimension]

    @property
    def mu_function(self) -> ScalarFunction:
        return self.mu.mu if isinstance(self.mu, MuCandidate) else self.mu

    def mu_values(self, h_values: np.ndarray, times: Optional[np.ndarray] = None) -> np.ndarray:
        """mu(h) or mu(t, h) at paired samples."""
        mu = self.mu_function
        if mu.variables == ("t", "w"):
            if times is None:
                raise ValueError("mu depends on t but no times were given")
            return mu.eval_many(np.column_stack([times, h_values]))
        return mu.eval_many(np.asarray(h_values, dtype=float).reshape(-1, 1))

    def sample_points(self) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """Evaluation points (state-major, time-minor) and their times."""
        states = self.domain.points()
        if not self.time_varying:
            return states, None
        times = self.time.samples()
        state_block = np.repeat(states, len(times), axis=0)
        time_column = np.tile(times, len(states))
        return np.column_stack([state_block, time_column]), time_column

    def lie(self, points: np.ndarray) -> LieSample:
        return lie_derivatives(self.h, self.f, points, self.time_varying)

"""Control-affine problems x' = f(x) + g(x) u with input set A(x) u <= b(x)."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from invariant_kit.certify import BarrierProblem, lg_h, lie_derivatives
from invariant_kit.expr import ExprFunction, VectorExprFunction
from invariant_kit.minfunc import MuCandidate
from invariant_kit.models import BoxDomain

logger = logging.getLogger(__name__)

MAX_INPUTS = 8
MAX_INPUT_ROWS = 16


@dataclass(frozen=True)
class ViableSet:
    """K(x) = {u : G u <= d}; the last row is the barrier constraint."""

    G: np.ndarray
    d: np.ndarray
    labels: tuple[str, ...]
    h: float
    lfh: float
    lgh: np.ndarray
    mu_h: float

    @property
    def barrier_row(self) -> dict:
        return {"h": self.h, "Lfh": self.lfh, "Lgh": [float(v) for v in self.lgh], "minus_mu_h": -self.mu_h}


@dataclass(frozen=True)
class ControlProblem:
    """Drift f (n), input matrix g (n x m), barrier h, mu, constraints A (k x m), b (k), nominal k_nom (m)."""

    f: VectorExprFunction
    g: VectorExprFunction
    h: ExprFunction
    mu: MuCandidate
    A: VectorExprFunction
    b: VectorExprFunction
    k_nom: VectorExprFunction
    domain: BoxDomain

    def __post_init__(self):
        n = self.domain.dimension
        if self.f.shape != (n,):
            raise ValueError(f"f must have shape ({n},), got {self.f.shape}")
        if len(self.g.shape) != 2 or self.g.shape[0] != n:
            raise ValueError(f"g must have shape ({n}, m), got {self.g.shape}")
        m = self.g.shape[1]
        if not 1 <= m <= MAX_INPUTS:
            raise ValueError(f"Need 1 <= m <= {MAX_INPUTS} inputs, got {m}")
        if self.k_nom.shape != (m,):
            raise ValueError(f"k_nom must have shape ({m},), got {self.k_nom.shape}")
        k = self.b.shape[0]
        if self.b.shape != (k,) or self.A.shape != (k, m):
            raise ValueError(f"A must be ({k}, {m}) to match b of length {k}, got {self.A.shape}")
        if k > MAX_INPUT_ROWS:
            raise ValueError(f"At most {MAX_INPUT_ROWS} input constraints, got {k}")
        for name in ("f", "g", "A", "b", "k_nom"):
            if getattr(self, name).variables != self.h.variables:
                raise ValueError(f"{name} must use the same variables as h")

    @property
    def n(self) -> int:
        return self.domain.dimension

    @property
    def m(self) -> int:
        return self.g.shape[1]

    @property
    def k(self) -> int:
        return self.b.shape[0]

    def drift_problem(self) -> BarrierProblem:
        """The uncontrolled barrier problem x' = f(x)."""
        return BarrierProblem(self.f, self.h, self.mu, self.domain)

    def viable_set(self, x: Sequence[float]) -> ViableSet:
        point = np.asarray(x, dtype=float).reshape(1, -1)
        lie = lie_derivatives(self.h, self.f, point)
        lgh = lg_h(lie.gradients, self.g.eval_many(point))[0]
        h = float(lie.h[0])
        lfh = float(lie.lfh[0])
        mu_h = float(self.mu.mu.eval((h,)))
        G = np.vstack([self.A.eval(point[0]).reshape(self.k, self.m), -lgh.reshape(1, -1)])
        d = np.append(self.b.eval(point[0]), mu_h + lfh)
        labels = tuple(f"input_{i}" for i in range(self.k)) + ("barrier",)
        return ViableSet(G, d, labels, h, lfh, lgh, mu_h)

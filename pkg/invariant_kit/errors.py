"""Exception hierarchy for invariant-kit.

Conditions that are reported rather than raised (nondifferentiable points,
degenerate active sets, unbounded LPs, empty safe sets, empty level bands)
live as flags on the returned records instead.
"""

from typing import Optional, Sequence


class InvariantKitError(Exception):
    """Base class for all errors raised by invariant-kit."""


class ExpressionError(InvariantKitError):
    """Base class for expression parsing and evaluation errors."""


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression source."""

    def __init__(self, position: int, message: str, source: str = ""):
        self.position = position
        self.message = message
        self.source = source
        super().__init__(f"{message} at position {position}" + (f" in {source!r}" if source else ""))


class UnknownVariable(ExpressionError):
    """Identifier that is neither a declared variable nor a known function."""

    def __init__(self, name: str, variables: Sequence[str] = ()):
        self.name = name
        self.variables = list(variables)
        super().__init__(f"Unknown variable {name!r} (declared: {', '.join(self.variables) or 'none'})")


class DomainError(ExpressionError):
    """Expression evaluated outside its real domain."""

    def __init__(self, subexpression: str, message: str):
        self.subexpression = subexpression
        self.message = message
        super().__init__(f"{message} in {subexpression}")


class NonMonotoneFamily(InvariantKitError):
    """The perturbed comparison family lost its ordering in epsilon."""

    def __init__(self, time: float, index: int, gap: float):
        self.time = time
        self.index = index
        self.gap = gap
        super().__init__(
            f"Trajectory {index} exceeds trajectory {index + 1} by {gap:.3e} at t={time:.6g}; "
            "the integrator step is too coarse"
        )


class GridMismatch(InvariantKitError):
    """Two sampled functions do not share a common time grid."""


class SignViolation(InvariantKitError):
    """mu is not strictly positive on the integration range."""

    def __init__(self, w: float, value: float):
        self.w = w
        self.value = value
        super().__init__(f"mu({w:.6g}) = {value:.3e} is not positive on the integration range")


class EmptyBoundary(InvariantKitError):
    """No grid point lies in the boundary band, even after widening it."""

    def __init__(self, band: float):
        self.band = band
        super().__init__(f"No grid point satisfies |h(x)| <= {band:g}")


class SolverError(InvariantKitError):
    """The active-set enumeration could neither solve nor certify emptiness."""


class QPInfeasibleAtState(InvariantKitError):
    """The safety filter has no feasible input at a simulated state."""

    def __init__(self, t: float, x: Sequence[float]):
        self.t = t
        self.x = list(x)
        super().__init__(f"Safety filter infeasible at t={t:.6g}, x={self.x}")


class ConfigError(InvariantKitError):
    """Problem config cannot be read or is inconsistent."""

    def __init__(self, path: str, field: Optional[str], message: str):
        self.path = path
        self.field = field
        self.message = message
        location = f"{path}:{field}" if field else path
        super().__init__(f"{location}: {message}")

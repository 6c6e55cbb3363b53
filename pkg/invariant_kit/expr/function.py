"""Parsed scalar and vector expressions over named variables."""

import logging
from dataclasses import dataclass, field
from typing import Protocol, Sequence, Union, runtime_checkable

import numpy as np

from invariant_kit.expr.evaluator import differentiate_batch, evaluate_batch, evaluate_point
from invariant_kit.expr.nodes import Node, to_source, variables_used
from invariant_kit.expr.parser import parse_source

logger = logging.getLogger(__name__)


@runtime_checkable
class ScalarFunction(Protocol):
    """Anything that evaluates like a scalar expression (parsed or sampled)."""

    variables: tuple[str, ...]

    def eval(self, point: Sequence[float]) -> float: ...

    def eval_many(self, points: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class GradientResult:
    """Value and gradient at one point."""

    value: float
    gradient: np.ndarray
    nondifferentiable: bool = False


@dataclass(frozen=True)
class GradientBatch:
    """Values, gradients (N, n_vars) and kink flags at many points."""

    values: np.ndarray
    gradients: np.ndarray
    nondifferentiable: np.ndarray


def _as_points(points, n_vars: int) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    if array.ndim == 1 and n_vars == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2 or array.shape[1] != n_vars:
        raise ValueError(f"Expected points of shape (N, {n_vars}), got {array.shape}")
    return array


@dataclass(frozen=True)
class ExprFunction:
    """A scalar expression; immutable and safe to share between threads."""

    source: str
    variables: tuple[str, ...]
    ast: Node = field(repr=False)

    @property
    def free_variables(self) -> frozenset[str]:
        return variables_used(self.ast)

    def _check_point(self, point: Sequence[float]) -> Sequence[float]:
        if len(point) != len(self.variables):
            raise ValueError(
                f"{self.source!r} takes {len(self.variables)} value(s) "
                f"({', '.join(self.variables)}), got {len(point)}"
            )
        return point

    def eval(self, point: Sequence[float]) -> float:
        return evaluate_point(self.ast, self._check_point(point))

    def __call__(self, *values: float) -> float:
        return self.eval(values)

    def eval_many(self, points) -> np.ndarray:
        return evaluate_batch(self.ast, _as_points(points, len(self.variables)))

    def grad(self, point: Sequence[float]) -> GradientResult:
        batch = self.grad_many(np.asarray([self._check_point(point)], dtype=float))
        flagged = bool(batch.nondifferentiable[0])
        if flagged:
            logger.debug(f"{self.source!r} is not differentiable at {list(point)}; one-sided derivative used")
        return GradientResult(float(batch.values[0]), batch.gradients[0], flagged)

    def grad_many(self, points) -> GradientBatch:
        result = differentiate_batch(self.ast, _as_points(points, len(self.variables)))
        return GradientBatch(result.val, result.der, np.asarray(result.kink, dtype=bool))

    def to_source(self) -> str:
        return to_source(self.ast)

    def __str__(self) -> str:
        return self.source


@dataclass(frozen=True)
class VectorExprFunction:
    """Vector- or matrix-valued expression; components share one variable list."""

    components: tuple[ExprFunction, ...]
    shape: tuple[int, ...]
    variables: tuple[str, ...]

    def __post_init__(self):
        if int(np.prod(self.shape)) != len(self.components):
            raise ValueError(f"{len(self.components)} components do not fill shape {self.shape}")
        for component in self.components:
            if component.variables != self.variables:
                raise ValueError("All components must share the same variable list")

    def eval(self, point: Sequence[float]) -> np.ndarray:
        values = [component.eval(point) for component in self.components]
        return np.asarray(values, dtype=float).reshape(self.shape)

    def eval_many(self, points) -> np.ndarray:
        array = _as_points(points, len(self.variables))
        columns = [component.eval_many(array) for component in self.components]
        stacked = np.stack(columns, axis=-1) if columns else np.zeros((array.shape[0], 0))
        return stacked.reshape((array.shape[0],) + self.shape)

    @property
    def sources(self) -> list[str]:
        return [component.source for component in self.components]


def parse(source: str, variables: Sequence[str]) -> ExprFunction:
    """Parse one expression; raises ExpressionSyntaxError or UnknownVariable."""
    variables = tuple(variables)
    return ExprFunction(source, variables, parse_source(source, variables))


def parse_vector(
    sources: Union[Sequence[str], Sequence[Sequence[str]]],
    variables: Sequence[str],
    columns: int | None = None,
) -> VectorExprFunction:
    """Parse a list (vector) or list of lists (matrix) of expressions.

    ``columns`` fixes the width of an empty matrix, e.g. no input constraints.
    """
    variables = tuple(variables)
    rows = list(sources)
    if rows and not isinstance(rows[0], str):
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValueError("Matrix rows must have equal length")
        flat = [item for row in rows for item in row]
        shape: tuple[int, ...] = (len(rows), width)
    elif columns is not None and not rows:
        flat, shape = [], (0, columns)
    else:
        flat, shape = rows, (len(rows),)
    components = tuple(parse(item, variables) for item in flat)
    return VectorExprFunction(components, shape, variables)

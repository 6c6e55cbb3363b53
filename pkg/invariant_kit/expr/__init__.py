"""Expression parsing, evaluation and forward-mode differentiation."""

from .dual import Dual
from .function import (
    ExprFunction,
    GradientBatch,
    GradientResult,
    ScalarFunction,
    VectorExprFunction,
    parse,
    parse_vector,
)
from .nodes import to_source
from .parser import FUNCTIONS

__all__ = [
    "Dual",
    "ExprFunction",
    "GradientBatch",
    "GradientResult",
    "ScalarFunction",
    "VectorExprFunction",
    "parse",
    "parse_vector",
    "to_source",
    "FUNCTIONS",
]

"""Tree-walking evaluation with interchangeable arithmetic.

The same walker drives three arithmetics: ``math`` floats for single points,
numpy arrays for batches of points, and ``Dual`` batches for gradients. Domain
checks are shared so every path raises the same ``DomainError``.
"""

import math
from typing import Callable, Sequence

import numpy as np

from invariant_kit.errors import DomainError
from invariant_kit.expr import dual
from invariant_kit.expr.dual import Dual
from invariant_kit.expr.nodes import BinOp, Call, Neg, Node, Num, Var, to_source


def _fail(node: Node, message: str):
    raise DomainError(to_source(node), message)


class Arithmetic:
    """Operations shared by all arithmetics; subclasses supply the rest."""

    def const(self, value: float):
        return value

    def values(self, a):
        return a

    def neg(self, a):
        return -a

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def div(self, node: Node, a, b):
        if np.any(np.asarray(self.values(b)) == 0):
            _fail(node, "division by zero")
        return a / b

    def power(self, node: Node, a, b):
        base = np.asarray(self.values(a), dtype=float)
        exponent = np.asarray(self.values(b), dtype=float)
        if np.any((base < 0) & (exponent != np.floor(exponent))):
            _fail(node, "negative base with non-integer exponent (use cbrt for odd roots)")
        if np.any((base == 0) & (exponent < 0)):
            _fail(node, "zero raised to a negative power")
        return self._power(node, a, b)

    def call(self, node: Call, args: list):
        name = node.name
        if name == "ln":
            if np.any(np.asarray(self.values(args[0])) <= 0):
                _fail(node, "ln of a non-positive value")
        elif name == "sqrt":
            if np.any(np.asarray(self.values(args[0])) < 0):
                _fail(node, "sqrt of a negative value")
        result = self._call(name, args)
        if name == "exp" and not np.all(np.isfinite(self.values(result))):
            _fail(node, "exp overflow")
        return result

    def settle(self, node: Node, result):
        return result

    def _power(self, node: Node, a, b):
        raise NotImplementedError

    def _call(self, name: str, args: list):
        raise NotImplementedError

    def select(self, cond, env: list, then_fn: Callable, else_fn: Callable):
        raise NotImplementedError


class FloatArithmetic(Arithmetic):
    """Single-point evaluation with the math module."""

    def div(self, node, a, b):
        if b == 0:
            _fail(node, "division by zero")
        return a / b

    def power(self, node, a, b):
        if a < 0 and not float(b).is_integer():
            _fail(node, "negative base with non-integer exponent (use cbrt for odd roots)")
        if a == 0 and b < 0:
            _fail(node, "zero raised to a negative power")
        try:
            return math.pow(a, b)
        except OverflowError:
            _fail(node, "power overflow")

    def call(self, node, args):
        name = node.name
        x = args[0]
        if name == "abs":
            return abs(x)
        if name == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                _fail(node, "exp overflow")
        if name == "ln":
            if x <= 0:
                _fail(node, "ln of a non-positive value")
            return math.log(x)
        if name == "sqrt":
            if x < 0:
                _fail(node, "sqrt of a negative value")
            return math.sqrt(x)
        if name == "cbrt":
            return math.cbrt(x)
        if name == "min":
            return min(args)
        if name == "max":
            return max(args)
        raise ValueError(f"Unsupported function {name}")

    def select(self, cond, env, then_fn, else_fn):
        return then_fn(env) if cond > 0 else else_fn(env)


class ArrayArithmetic(Arithmetic):
    """Batch evaluation over numpy arrays, one entry per point."""

    def _power(self, node, a, b):
        result = np.power(a, b)
        if not np.all(np.isfinite(result)):
            _fail(node, "power overflow")
        return result

    def _call(self, name, args):
        x = args[0]
        if name == "abs":
            return np.abs(x)
        if name == "exp":
            return np.exp(x)
        if name == "ln":
            return np.log(x)
        if name == "sqrt":
            return np.sqrt(x)
        if name == "cbrt":
            return np.cbrt(x)
        if name == "min":
            return _fold(np.minimum, args)
        if name == "max":
            return _fold(np.maximum, args)
        raise ValueError(f"Unsupported function {name}")

    def select(self, cond, env, then_fn, else_fn):
        if np.ndim(cond) == 0:
            return then_fn(env) if cond > 0 else else_fn(env)
        mask = cond > 0
        if mask.all():
            return then_fn(env)
        if not mask.any():
            return else_fn(env)
        out = np.empty(mask.shape)
        out[mask] = then_fn(_subset_arrays(env, mask))
        out[~mask] = else_fn(_subset_arrays(env, ~mask))
        return out


class DualArithmetic(Arithmetic):
    """Batch evaluation carrying gradients with respect to every variable."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars

    def const(self, value):
        return Dual.constant(value, self.n_vars)

    def values(self, a):
        return a.val

    def settle(self, node, result):
        # 0 * inf in the chain rule, e.g. cbrt(w)^2 at w = 0
        if np.any(np.isnan(result.der) & np.isfinite(np.asarray(result.val))[..., None]):
            _fail(node, "indeterminate derivative")
        return result

    def power(self, node, a, b):
        if np.any(b.der) and np.any(np.asarray(a.val) <= 0):
            _fail(node, "non-positive base with a variable exponent")
        return super().power(node, a, b)

    def _power(self, node, a, b):
        result = a ** b
        if not np.all(np.isfinite(result.val)):
            _fail(node, "power overflow")
        return result

    def _call(self, name, args):
        x = args[0]
        if name == "abs":
            return dual.absolute(x)
        if name == "exp":
            return dual.exp(x)
        if name == "ln":
            return dual.log(x)
        if name == "sqrt":
            return dual.sqrt(x)
        if name == "cbrt":
            return dual.cbrt(x)
        if name == "min":
            return _fold(dual.minimum, args)
        if name == "max":
            return _fold(dual.maximum, args)
        raise ValueError(f"Unsupported function {name}")

    def select(self, cond, env, then_fn, else_fn):
        values = np.asarray(cond.val)
        if values.ndim == 0:
            result = then_fn(env) if values > 0 else else_fn(env)
            return _mark(result, values == 0)
        mask = values > 0
        if mask.all():
            return then_fn(env)
        if not mask.any():
            return _mark(else_fn(env), values == 0)
        taken = then_fn([d.subset(mask) for d in env]).broadcast(int(mask.sum()))
        other = else_fn([d.subset(~mask) for d in env]).broadcast(int((~mask).sum()))
        val = np.empty(mask.shape)
        der = np.empty(mask.shape + (self.n_vars,))
        kink = np.empty(mask.shape, dtype=bool)
        val[mask], der[mask], kink[mask] = taken.val, taken.der, taken.kink
        val[~mask], der[~mask], kink[~mask] = other.val, other.der, other.kink
        return Dual(val, der, kink | (values == 0))


def _fold(op, args):
    result = args[0]
    for arg in args[1:]:
        result = op(result, arg)
    return result


def _subset_arrays(env: list, mask: np.ndarray) -> list:
    return [v[mask] if np.ndim(v) else v for v in env]


def _mark(result: Dual, at_switch) -> Dual:
    return Dual(result.val, result.der, result.kink | at_switch)


def evaluate(node: Node, env: list, arithmetic: Arithmetic):
    """Evaluate node with variable values env[i] under the given arithmetic."""
    if isinstance(node, Num):
        return arithmetic.const(node.value)
    if isinstance(node, Var):
        return env[node.index]
    if isinstance(node, Neg):
        return arithmetic.neg(evaluate(node.operand, env, arithmetic))
    if isinstance(node, BinOp):
        left = evaluate(node.left, env, arithmetic)
        right = evaluate(node.right, env, arithmetic)
        if node.op == "+":
            result = arithmetic.add(left, right)
        elif node.op == "-":
            result = arithmetic.sub(left, right)
        elif node.op == "*":
            result = arithmetic.mul(left, right)
        elif node.op == "/":
            result = arithmetic.div(node, left, right)
        else:
            result = arithmetic.power(node, left, right)
        return arithmetic.settle(node, result)
    if isinstance(node, Call):
        if node.name == "ifpos":
            cond = evaluate(node.args[0], env, arithmetic)
            return arithmetic.select(
                cond,
                env,
                lambda sub_env: evaluate(node.args[1], sub_env, arithmetic),
                lambda sub_env: evaluate(node.args[2], sub_env, arithmetic),
            )
        args = [evaluate(arg, env, arithmetic) for arg in node.args]
        return arithmetic.settle(node, arithmetic.call(node, args))
    raise TypeError(f"Not an expression node: {node!r}")


FLOAT = FloatArithmetic()
ARRAY = ArrayArithmetic()


def evaluate_point(node: Node, point: Sequence[float]) -> float:
    return float(evaluate(node, [float(v) for v in point], FLOAT))


def evaluate_batch(node: Node, points: np.ndarray) -> np.ndarray:
    """Evaluate at every row of an (N, n_vars) array."""
    columns = [points[:, i] for i in range(points.shape[1])]
    with np.errstate(all="ignore"):
        result = evaluate(node, columns, ARRAY)
    return np.broadcast_to(np.asarray(result, dtype=float), (points.shape[0],)).copy()


def differentiate_batch(node: Node, points: np.ndarray) -> Dual:
    """Values, gradients and kink masks at every row of an (N, n_vars) array."""
    n_points, n_vars = points.shape
    env = [Dual.variable(points[:, i], i, n_vars) for i in range(n_vars)]
    with np.errstate(all="ignore"):
        result = evaluate(node, env, DualArithmetic(n_vars))
    return result.broadcast(n_points)

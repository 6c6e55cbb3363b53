"""Forward-mode dual numbers over batches of points.

A ``Dual`` carries values of shape ``(N,)`` (or a scalar for constants), the
gradient with respect to every variable, shape ``(N, n)`` (or ``(n,)``), and a
kink mask marking points where a one-sided derivative was substituted.
"""

from typing import Union

import numpy as np

Scalar = Union[float, np.ndarray]


def _scale(der: np.ndarray, factor: Scalar) -> np.ndarray:
    return np.asarray(factor)[..., None] * der


def _chain(der: np.ndarray, slope: Scalar) -> np.ndarray:
    """Chain rule that keeps untouched axes at zero when the slope is infinite."""
    return np.where(der == 0, 0.0, _scale(der, slope))


class Dual:
    """Value plus gradient, propagated by the chain rule."""

    __slots__ = ("val", "der", "kink")

    def __init__(self, val: Scalar, der: np.ndarray, kink: Union[bool, np.ndarray] = False):
        self.val = val
        self.der = der
        self.kink = kink

    @classmethod
    def variable(cls, values: np.ndarray, index: int, n_vars: int) -> "Dual":
        values = np.asarray(values, dtype=float)
        der = np.zeros(values.shape + (n_vars,))
        der[..., index] = 1.0
        return cls(values, der, np.zeros(values.shape, dtype=bool))

    @classmethod
    def constant(cls, value: float, n_vars: int) -> "Dual":
        return cls(float(value), np.zeros(n_vars), False)

    def _coerce(self, other) -> "Dual":
        if isinstance(other, Dual):
            return other
        return Dual(float(other), np.zeros(self.der.shape[-1]), False)

    def subset(self, mask: np.ndarray) -> "Dual":
        """Restrict to the points selected by mask (constants pass through)."""
        if np.ndim(self.val) == 0:
            return self
        kink = self.kink[mask] if np.ndim(self.kink) else self.kink
        return Dual(self.val[mask], self.der[mask], kink)

    def broadcast(self, size: int) -> "Dual":
        n_vars = self.der.shape[-1]
        val = np.broadcast_to(np.asarray(self.val, dtype=float), (size,)).copy()
        der = np.broadcast_to(self.der, (size, n_vars)).copy()
        kink = np.broadcast_to(np.asarray(self.kink, dtype=bool), (size,)).copy()
        return Dual(val, der, kink)

    def __neg__(self) -> "Dual":
        return Dual(-self.val, -self.der, self.kink)

    def __add__(self, other) -> "Dual":
        other = self._coerce(other)
        return Dual(self.val + other.val, self.der + other.der, self.kink | other.kink)

    __radd__ = __add__

    def __sub__(self, other) -> "Dual":
        other = self._coerce(other)
        return Dual(self.val - other.val, self.der - other.der, self.kink | other.kink)

    def __rsub__(self, other) -> "Dual":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Dual":
        other = self._coerce(other)
        der = _scale(self.der, other.val) + _scale(other.der, self.val)
        return Dual(self.val * other.val, der, self.kink | other.kink)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Dual":
        other = self._coerce(other)
        quotient = self.val / other.val
        der = _scale(self.der - _scale(other.der, quotient), 1.0 / other.val)
        return Dual(quotient, der, self.kink | other.kink)

    def __rtruediv__(self, other) -> "Dual":
        return self._coerce(other) / self

    def __pow__(self, other) -> "Dual":
        other = self._coerce(other)
        value = np.power(self.val, other.val)
        if not np.any(other.der):
            # d(a^p) = p a^(p-1) da, valid for negative bases with integer p
            exponent = other.val
            slope = np.where(exponent == 0, 0.0, exponent * np.power(self.val, exponent - 1.0))
            return Dual(value, _chain(self.der, slope), self.kink | other.kink)
        log_base = np.log(self.val)
        der = _scale(_scale(other.der, log_base) + _scale(self.der, other.val / self.val), value)
        return Dual(value, der, self.kink | other.kink)


def exp(a: Dual) -> Dual:
    value = np.exp(a.val)
    return Dual(value, _scale(a.der, value), a.kink)


def log(a: Dual) -> Dual:
    return Dual(np.log(a.val), _scale(a.der, 1.0 / a.val), a.kink)


def sqrt(a: Dual) -> Dual:
    value = np.sqrt(a.val)
    at_zero = np.asarray(a.val) == 0
    return Dual(value, _chain(a.der, 0.5 / value), a.kink | at_zero)


def cbrt(a: Dual) -> Dual:
    value = np.cbrt(a.val)
    at_zero = np.asarray(a.val) == 0
    return Dual(value, _chain(a.der, 1.0 / (3.0 * value * value)), a.kink | at_zero)


def absolute(a: Dual) -> Dual:
    at_zero = np.asarray(a.val) == 0
    smooth = _scale(a.der, np.sign(a.val))
    der = np.where(at_zero[..., None], np.abs(a.der), smooth)
    return Dual(np.abs(a.val), der, a.kink | at_zero)


def minimum(a: Dual, b: Dual) -> Dual:
    return _pick(a, b, np.minimum)


def maximum(a: Dual, b: Dual) -> Dual:
    return _pick(a, b, np.maximum)


def _pick(a: Dual, b: Dual, choose) -> Dual:
    a_val = np.asarray(a.val, dtype=float)
    b_val = np.asarray(b.val, dtype=float)
    value = choose(a_val, b_val)
    tie = a_val == b_val
    take_a = (value == a_val) & ~tie
    der_a, der_b = np.broadcast_arrays(a.der, b.der)
    # at a tie the one-sided derivative from above picks per axis
    der = np.where(tie[..., None], choose(der_a, der_b), np.where(take_a[..., None], der_a, der_b))
    return Dual(value, der, a.kink | b.kink | tie)

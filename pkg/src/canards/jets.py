"""Second-order forward-mode differentiation.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar quantity
with respect to ``n`` seed variables. Arithmetic on jets follows the truncated
second-order Taylor rules, so composing a field from jets yields its exact
first and second derivatives up to rounding.

A *field* is any callable ``field(x, p)`` where ``x`` is a sequence of state
components and ``p`` a parameter mapping. Written with ordinary operators and
the elementary functions of this module, the same callable accepts floats
(for integration) and jets (for differentiation).
"""

from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError

Field = Callable[[Sequence, Mapping[str, float]], object]


class Jet2:
    """Value, gradient and symmetric Hessian of a scalar at a point."""

    __slots__ = ("value", "gradient", "hessian")
    __array_priority__ = 1000  # keep numpy scalars from swallowing jets

    def __init__(self, value: float, gradient: np.ndarray, hessian: np.ndarray):
        self.value = float(value)
        self.gradient = gradient
        self.hessian = hessian

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Jet2":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(value, g, np.zeros((n, n)))

    @classmethod
    def constant(cls, value: float, n: int) -> "Jet2":
        return cls(value, np.zeros(n), np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.gradient.shape[0]

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, gradient={self.gradient.tolist()!r})"

    def _chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        # h(u) with h' = f1, h'' = f2.  The outer product keeps H exactly symmetric.
        g = self.gradient
        return Jet2(f0, f1 * g, f1 * self.hessian + f2 * np.outer(g, g))

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __pos__(self) -> "Jet2":
        return self

    def __add__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.gradient + other.gradient,
                        self.hessian + other.hessian)
        return Jet2(self.value + other, self.gradient, self.hessian)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return Jet2(self.value - other.value, self.gradient - other.gradient,
                        self.hessian - other.hessian)
        return Jet2(self.value - other, self.gradient, self.hessian)

    def __rsub__(self, other) -> "Jet2":
        return Jet2(other - self.value, -self.gradient, -self.hessian)

    def __mul__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            ga, gb = self.gradient, other.gradient
            cross = np.outer(ga, gb)
            h = self.hessian * other.value + other.hessian * self.value + cross + cross.T
            return Jet2(self.value * other.value, ga * other.value + gb * self.value, h)
        return Jet2(self.value * other, self.gradient * other, self.hessian * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        v = self.value
        if v == 0.0:
            raise ZeroDivisionError("jet division by zero")
        return self._chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))

    def __truediv__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        return Jet2(self.value / other, self.gradient / other, self.hessian / other)

    def __rtruediv__(self, other) -> "Jet2":
        return self.reciprocal() * other

    def __pow__(self, exponent) -> "Jet2":
        if isinstance(exponent, Jet2):
            return exp(exponent * log(self))
        p = float(exponent)
        if p == 0.0:
            return Jet2.constant(1.0, self.n)
        if p == 1.0:
            return self
        if p == 2.0:
            return self * self
        v = self.value
        if v == 0.0 and p < 2.0:
            raise DomainError(f"power {p} is not twice differentiable at 0")
        if v < 0.0 and not p.is_integer():
            raise DomainError("non-integer power of a negative jet")
        return self._chain(v ** p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0))

    def __rpow__(self, base) -> "Jet2":
        return exp(self * math.log(base))


def _unary(name: str, fjet: Callable[[float], tuple[float, float, float]],
           ffloat: Callable[[float], float]):
    def op(u):
        if isinstance(u, Jet2):
            return u._chain(*fjet(u.value))
        return ffloat(u)
    op.__name__ = name
    op.__doc__ = f"``{name}`` over floats and jets."
    return op


def _sqrt_parts(v):
    if v <= 0.0:
        raise DomainError("sqrt is not differentiable at or below 0")
    r = math.sqrt(v)
    return r, 0.5 / r, -0.25 / (r * v)


def _log_parts(v):
    if v <= 0.0:
        raise DomainError("log of a non-positive jet")
    return math.log(v), 1.0 / v, -1.0 / (v * v)


def _abs_parts(v):
    if v == 0.0:
        raise DomainError("abs is not differentiable at 0")
    s = 1.0 if v > 0.0 else -1.0
    return abs(v), s, 0.0


def _tanh_parts(v):
    t = math.tanh(v)
    return t, 1.0 - t * t, -2.0 * t * (1.0 - t * t)


sqrt = _unary("sqrt", _sqrt_parts, math.sqrt)
exp = _unary("exp", lambda v: (math.exp(v),) * 3, math.exp)
log = _unary("log", _log_parts, math.log)
sin = _unary("sin", lambda v: (math.sin(v), math.cos(v), -math.sin(v)), math.sin)
cos = _unary("cos", lambda v: (math.cos(v), -math.sin(v), -math.cos(v)), math.cos)
tanh = _unary("tanh", _tanh_parts, math.tanh)
fabs = _unary("fabs", _abs_parts, abs)


def seed(point: Sequence[float]) -> list[Jet2]:
    """Independent variable jets for every coordinate of ``point``."""
    n = len(point)
    if n < 1:
        raise ValueError("point must have at least one coordinate")
    return [Jet2.variable(float(v), i, n) for i, v in enumerate(point)]


def as_jet(result, n: int) -> Jet2:
    if isinstance(result, Jet2):
        return result
    return Jet2.constant(float(result), n)


def jet_eval(field: Field, point: Sequence[float],
             params: Mapping[str, float] | None = None) -> Jet2:
    """Value, gradient and Hessian of ``field`` at ``point``.

    Raises :class:`DomainError` if the field passes through a primitive that
    is not twice differentiable at the point (for instance ``fabs`` at 0).
    """
    x = seed(point)
    return as_jet(field(x, params or {}), len(x))


def jet_eval_many(fields: Sequence[Field], point: Sequence[float],
                  params: Mapping[str, float] | None = None) -> list[Jet2]:
    """Evaluate several fields on one shared set of seed variables."""
    x = seed(point)
    p = params or {}
    return [as_jet(f(x, p), len(x)) for f in fields]

"""Memristor flux-charge characteristics and their least-squares cubic fit."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Callable

from .errors import PreconditionError
from .jets import fabs

# Reference 4D coefficients. The generating (a, b, d) are not known, so these
# are kept verbatim instead of being refit.
CHUA4D_C1 = 0.393781
CHUA4D_C2 = -0.72357


@dataclass(frozen=True)
class CubicFit:
    """Least-squares cubic ``c1*phi**3 + c2*phi`` to the PWL curve on [-d, d]."""

    c1: float
    c2: float
    a: float
    b: float
    d: float
    residual: float

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "d": self.d,
                "c1": self.c1, "c2": self.c2, "residual": self.residual}


def pwl_charge(phi, a: float, b: float):
    """Piecewise-linear characteristic: slope ``a`` on |phi| < 1, ``b`` outside.

    Accepts floats and jets. Jets raise at the kinks phi = +-1.
    """
    return b * phi + 0.5 * (a - b) * (fabs(phi + 1.0) - fabs(phi - 1.0))


def cubic_charge(phi, fit: CubicFit):
    return fit.c1 * phi ** 3 + fit.c2 * phi


def cubic_coefficients(a: float, b: float, d: float) -> tuple[float, float]:
    """Closed-form minimizer of the square error over (c1, c2)."""
    if not d > 1.0:
        raise PreconditionError(f"half-width d must exceed 1, got {d!r}")
    c1 = -35.0 * (a - b) * (d * d - 1.0) ** 2 / (16.0 * d ** 7)
    c2 = (a - b) * (21.0 - 50.0 * d ** 2 + 45.0 * d ** 4) / (16.0 * d ** 5) + b
    return c1, c2


def fit_cubic(a: float, b: float, d: float) -> CubicFit:
    c1, c2 = cubic_coefficients(a, b, d)
    return CubicFit(c1, c2, float(a), float(b), float(d), square_error(a, b, d, c1, c2))


EPS_MACHINE = sys.float_info.epsilon


def adaptive_simpson(f: Callable[[float], float], lo: float, hi: float,
                     tol: float = 1e-12, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(a, fa, b, fb):
        m = 0.5 * (a + b)
        fm = f(m)
        return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb = f(lo), f(hi)
    m, fm, whole = simpson(lo, fa, hi, fb)
    total = 0.0
    stack = [(lo, fa, hi, fb, m, fm, whole, tol, 0)]
    while stack:
        a, fa, b, fb, m, fm, whole, eps, depth = stack.pop()
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        diff = left + right - whole
        # below the rounding floor further halving cannot reduce diff
        floor = 64.0 * EPS_MACHINE * (abs(left) + abs(right))
        if depth >= max_depth or abs(diff) <= max(15.0 * eps, floor):
            total += left + right + diff / 15.0
        else:
            stack.append((a, fa, m, fm, lm, flm, left, 0.5 * eps, depth + 1))
            stack.append((m, fm, b, fb, rm, frm, right, 0.5 * eps, depth + 1))
    return total


def square_error(a: float, b: float, d: float, c1: float, c2: float,
                 tol: float = 1e-10) -> float:
    """Integral of (PWL - cubic)**2 over [-d, d], split at the kinks."""
    if not d > 0.0:
        raise PreconditionError(f"half-width d must be positive, got {d!r}")

    def integrand(phi):
        r = pwl_charge(phi, a, b) - (c1 * phi ** 3 + c2 * phi)
        return r * r

    cuts = sorted({-d, d, *(k for k in (-1.0, 1.0) if -d < k < d)})
    pieces = list(zip(cuts[:-1], cuts[1:]))
    return sum(adaptive_simpson(integrand, lo, hi, tol / len(pieces)) for lo, hi in pieces)

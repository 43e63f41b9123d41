"""Damped Newton iteration for small square systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoSignChange


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    converged: bool


def damped_newton(fun: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
                  x0, tol: float = 1e-12, max_iter: int = 50,
                  min_damping: float = 1.0 / 1024) -> NewtonResult:
    """Solve ``F(x) = 0`` where ``fun(x)`` returns ``(F(x), J(x))``.

    Each Newton step is halved until the max-norm residual decreases. A
    singular Jacobian falls back to the least-squares step.
    """
    x = np.array(x0, dtype=float)
    r, jac = fun(x)
    norm = float(np.max(np.abs(r)))
    for it in range(max_iter):
        if norm < tol:
            return NewtonResult(x, norm, it, True)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam = 1.0
        while True:
            trial = x + lam * step
            r_t, jac_t = fun(trial)
            norm_t = float(np.max(np.abs(r_t)))
            if np.isfinite(norm_t) and norm_t < norm:
                break
            lam *= 0.5
            if lam < min_damping:
                break
        if not (np.isfinite(norm_t) and norm_t < norm):
            return NewtonResult(x, norm, it, False)
        x, r, jac, norm = trial, r_t, jac_t, norm_t
    return NewtonResult(x, norm, max_iter, norm < tol)


def bisect(fun: Callable[[float], float], lo: float, hi: float,
           tol: float = 1e-12, max_iter: int = 200) -> float:
    """Bisection root of a scalar function that changes sign on ``[lo, hi]``."""
    f_lo = fun(lo)
    if f_lo == 0.0:
        return lo
    f_hi = fun(hi)
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NoSignChange(f"no sign change on [{lo!r}, {hi!r}]: {f_lo!r}, {f_hi!r}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            return mid
        f_mid = fun(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

"""Pseudo-singular points and the genericity hypotheses.

A pseudo-singular point solves

    g_1 = 0,    dg_1/dy_1 = 0,    sum_i dg_1/dx_i * f_i = 0.

With two slow variables these are isolated points. With three slow variables
they form a curve, so one coordinate is pinned to a chosen value and the
other three are solved for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import circuit_info
from .errors import ConvergenceError, PreconditionError
from .newton import bisect, damped_newton
from .system import SlowFastSystem, solve_on_manifold

RESIDUAL_TOL = 1e-10
MERGE_TOL = 1e-6
FIXED_POINT_TOL = 1e-8
GENERIC_TOL = 1e-8

PLUS, MINUS = "plus", "minus"


@dataclass(frozen=True)
class PseudoSingularity:
    state: tuple[float, ...]
    free_index: int | None
    sign_branch: str

    @property
    def array(self) -> np.ndarray:
        return np.array(self.state)

    def as_dict(self) -> dict:
        return {"state": list(self.state), "free_index": self.free_index,
                "sign_branch": self.sign_branch}


@dataclass(frozen=True)
class GenericityReport:
    f2_value: float
    dg1_dx1: float
    d2g1_dy1sq: float
    all_pass: bool

    def as_dict(self) -> dict:
        return {"f2_value": self.f2_value, "dg1_dx1": self.dg1_dx1,
                "d2g1_dy1sq": self.d2g1_dy1sq, "all_pass": self.all_pass}


def folded_residuals(system: SlowFastSystem, state) -> tuple[np.ndarray, np.ndarray]:
    """Residuals ``(g, g_y, G_1)`` and their Jacobian in all coordinates."""
    jets = system.jets(state)
    g = jets[-1]
    k = system.k
    f = [j.value for j in jets[:k]]
    gy = g.gradient[k]
    G1 = sum(g.gradient[j] * f[j] for j in range(k))
    dG1 = sum(g.hessian[j] * f[j] + g.gradient[j] * jets[j].gradient for j in range(k))
    r = np.array([g.value, gy, G1])
    jac = np.vstack([g.gradient, g.hessian[k], dG1])
    return r, jac


def _branch(state, fast_index: int) -> str:
    return PLUS if state[fast_index] >= 0.0 else MINUS


def _default_free_index(system: SlowFastSystem) -> int | None:
    if system.k == 2:
        return None
    info = circuit_info(system)
    return info.free_index if info and info.free_index is not None else 1


def fold_seeds(system: SlowFastSystem, free_index: int | None = None,
               free_value: float = 0.0, y_range: tuple[float, float] = (-5.0, 5.0),
               samples: int = 201) -> list[np.ndarray]:
    """Points on the fold curve, found by scanning the fast coordinate.

    Non-fast slow coordinates are held at zero (the pinned one at
    ``free_value``) and ``x_1`` is lifted onto M0 at every scan node.
    """
    k = system.k

    def lifted(y):
        s = np.zeros(system.dim)
        if free_index is not None:
            s[free_index] = free_value
        s[k] = y
        return solve_on_manifold(system, s, 0)

    def gy(y):
        return system.jets(lifted(y))[-1].gradient[k]

    ys = np.linspace(*y_range, samples)
    vals = []
    for y in ys:
        try:
            vals.append(gy(y))
        except ConvergenceError:
            vals.append(np.nan)
    seeds = []
    for i in range(samples - 1):
        a, b = vals[i], vals[i + 1]
        if np.isnan(a) or np.isnan(b) or (a > 0) == (b > 0):
            continue
        try:
            seeds.append(lifted(bisect(gy, ys[i], ys[i + 1], tol=1e-13)))
        except ConvergenceError:
            continue
    return seeds


def find_pseudo_singular_points(system: SlowFastSystem,
                                seeds: Sequence | None = None,
                                free_index: int | None = None,
                                free_value: float = 0.0,
                                tol: float = 1e-12,
                                report: list | None = None,
                                exclude_fixed_points: bool = True) -> list[PseudoSingularity]:
    """Damped Newton on the three folded equations from each seed.

    For ``k = 3`` the coordinate ``free_index`` (default ``x_2``) is pinned to
    ``free_value``; seeds are overwritten there. Non-converged seeds and
    discarded full-system fixed points are appended to ``report`` as messages.
    ``exclude_fixed_points=False`` keeps candidates where ``f`` vanishes too,
    which happens exactly at a saddle-node of the folded singularity.
    Results are merged within 1e-6 and sorted plus-branch first.
    """
    if system.k == 3 and free_index is None:
        free_index = _default_free_index(system)
    if system.k == 2:
        free_index = None
    elif not 0 <= free_index < system.k:
        raise PreconditionError("free_index must select a slow coordinate")
    if seeds is None:
        seeds = fold_seeds(system, free_index, free_value)
    unknowns = [i for i in range(system.dim) if i != free_index]

    def fun(z):
        s = np.empty(system.dim)
        s[unknowns] = z
        if free_index is not None:
            s[free_index] = free_value
        r, jac = folded_residuals(system, s)
        return r, jac[:, unknowns]

    found: list[np.ndarray] = []
    for seed in seeds:
        seed = np.asarray(seed, dtype=float)
        res = damped_newton(fun, seed[unknowns], tol=tol)
        state = np.empty(system.dim)
        state[unknowns] = res.x
        if free_index is not None:
            state[free_index] = free_value
        if not res.converged and res.residual >= RESIDUAL_TOL:
            if report is not None:
                report.append(f"pseudo-singular Newton did not converge from seed "
                              f"{seed.tolist()!r} (residual {res.residual!r})")
            continue
        f = system.vector_field(state)[: system.k]
        if exclude_fixed_points and np.max(np.abs(f)) < FIXED_POINT_TOL:
            if report is not None:
                report.append(f"discarded full-system fixed point {state.tolist()!r}")
            continue
        if any(np.max(np.abs(state - other)) < MERGE_TOL for other in found):
            continue
        found.append(state)
    found.sort(key=lambda s: (s[system.k] < 0.0, tuple(s)))
    return [PseudoSingularity(tuple(float(v) for v in s), free_index,
                              _branch(s, system.k)) for s in found]


def pseudo_singular_manifold(system: SlowFastSystem, free_index: int | None = None,
                             free_value: float = 0.0, branch: str = PLUS,
                             seeds: Sequence | None = None) -> PseudoSingularity:
    """One point of the pseudo-singular curve with ``x[free_index]`` pinned."""
    if system.k != 3:
        raise PreconditionError("the pseudo-singular manifold needs three slow variables")
    points = find_pseudo_singular_points(system, seeds, free_index, free_value)
    for p in points:
        if p.sign_branch == branch:
            return p
    raise ConvergenceError(f"no {branch} pseudo-singular point with x{free_index} = {free_value!r}")


def genericity_check(system: SlowFastSystem, psp: PseudoSingularity) -> GenericityReport:
    """Non-degeneracy of a pseudo-singular point, evaluated in place."""
    jets = system.jets(psp.state)
    g = jets[-1]
    k = system.k
    f2 = jets[1].value
    gx1 = g.gradient[0]
    gyy = g.hessian[k, k]
    ok = all(abs(v) > GENERIC_TOL for v in (f2, gx1, gyy))
    return GenericityReport(float(f2), float(gx1), float(gyy), ok)

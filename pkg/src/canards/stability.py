"""Fixed points, Routh-Hurwitz determinants and canard windows.

For a characteristic polynomial with ascending coefficients ``a_0 .. a_n``
(``n`` in {3, 4}) the determinants are

    D_1 = a_1,
    D_2 = a_1 a_2 - a_0 a_3,
    D_3 = a_1 a_2 a_3 - a_0 a_3**2 - a_1**2 a_4      (n = 4).

All roots lie in the open left half-plane iff ``a_0 > 0``, ``a_n > 0`` and
every applicable ``D_i > 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import circuit_info
from .classify import classify_folded_singularity, principal_minor_sums
from .errors import (BranchAbsent, ConvergenceError, HopfCertificateWarning, NoSignChange,
                     PreconditionError)
from .folded import PLUS, find_pseudo_singular_points
from .newton import bisect, damped_newton
from .system import SlowFastSystem

MARGINAL_BAND = 1e-8
HOPF_TOL = 1e-8
HOPF_RE_TOL = 1e-4
FIXED_POINT_RESIDUAL = 1e-8

STABLE, UNSTABLE, MARGINAL = "stable", "unstable", "marginal"


def full_jacobian(system: SlowFastSystem, state) -> np.ndarray:
    """Slow-time Jacobian of ``(f, g / eps)``."""
    jac = np.vstack([j.gradient for j in system.jets(state)])
    jac[-1] /= system.epsilon
    return jac


def _newton_fixed_point(system: SlowFastSystem, seed, tol: float = 1e-12):
    def fun(z):
        jets = system.jets(z)
        return (np.array([j.value for j in jets]), np.vstack([j.gradient for j in jets]))
    return damped_newton(fun, seed, tol=tol)


def find_fixed_points(system: SlowFastSystem, seeds: Sequence | None = None,
                      box: float = 4.0, per_dim: int = 5, tol: float = 1e-12,
                      report: list | None = None) -> list[np.ndarray]:
    """Zeros of the full vector field by Newton from a seed grid.

    The default grid spans ``[-box, box]`` in every coordinate and includes
    the origin. Results are merged within 1e-6 and sorted lexicographically.
    """
    if seeds is None:
        axis = np.linspace(-box, box, per_dim)
        grid = np.stack(np.meshgrid(*[axis] * system.dim, indexing="ij"), -1)
        seeds = [np.zeros(system.dim), *grid.reshape(-1, system.dim)]
    found: list[np.ndarray] = []
    failures = 0
    for seed in seeds:
        res = _newton_fixed_point(system, seed, tol)
        if not res.converged:
            failures += 1
            continue
        if not any(np.max(np.abs(res.x - o)) < 1e-6 for o in found):
            found.append(res.x)
    if failures and report is not None:
        report.append(f"fixed-point Newton did not converge from {failures} seed(s)")
    found = [np.where(np.abs(x) < 1e-14, 0.0, x) for x in found]
    found.sort(key=lambda s: tuple(s))
    return found


def characteristic_polynomial(system: SlowFastSystem, fixed_point) -> list[float]:
    """Ascending coefficients of ``eps * det(lambda I - J)``, leading term ``eps``."""
    residual = np.max(np.abs(system.vector_field(fixed_point)))
    if not residual < FIXED_POINT_RESIDUAL:
        raise PreconditionError(f"not a fixed point (residual {residual!r})")
    e = principal_minor_sums(full_jacobian(system, fixed_point))
    n = len(e)
    full = [1.0] + e
    eps = system.epsilon
    return [eps * (-1.0) ** (n - m) * full[n - m] for m in range(n + 1)]


@dataclass(frozen=True)
class RouthHurwitzReport:
    coefficients: tuple[float, ...]
    determinants: tuple[float, ...]
    status: str

    @property
    def stable(self) -> bool:
        return self.status == STABLE

    def as_dict(self) -> dict:
        return {"coefficients": list(self.coefficients),
                "determinants": list(self.determinants),
                "stable": self.stable, "status": self.status}


def hurwitz_determinants(a: Sequence[float]) -> tuple[float, ...]:
    n = len(a) - 1
    d1 = a[1]
    d2 = a[1] * a[2] - a[0] * a[3]
    if n == 3:
        return (d1, d2)
    return (d1, d2, a[1] * a[2] * a[3] - a[0] * a[3] ** 2 - a[1] ** 2 * a[4])


def routh_hurwitz(coefficients: Sequence[float], band: float = MARGINAL_BAND) -> RouthHurwitzReport:
    """Routh-Hurwitz test on ascending coefficients of degree 3 or 4.

    A polynomial with ``a_0 < 0`` is negated first. Any tested quantity within
    ``band`` of zero yields the ``marginal`` status.
    """
    a = [float(c) for c in coefficients]
    if len(a) - 1 not in (3, 4):
        raise PreconditionError(f"degree must be 3 or 4, got {len(a) - 1}")
    if a[0] < 0.0:
        a = [-c for c in a]
    dets = hurwitz_determinants(a)
    tested = (a[0], a[-1], *dets)
    if any(abs(v) <= band for v in tested):
        status = MARGINAL
    elif all(v > 0.0 for v in tested):
        status = STABLE
    else:
        status = UNSTABLE
    return RouthHurwitzReport(tuple(a), dets, status)


class FixedPointTracker:
    """Follow one fixed point as a parameter changes.

    Registered circuits seed every solve from their closed-form fixed point
    and raise :class:`BranchAbsent` where it does not exist. Other systems
    start from the stored root at the nearest parameter value when it lies
    within ``max_jump``, and otherwise from ``seed`` or the first nonzero
    fixed point found on the default grid.
    """

    def __init__(self, seed=None, max_jump: float = 0.02):
        self.seed = None if seed is None else np.asarray(seed, dtype=float)
        self.max_jump = max_jump
        self.roots: dict[float, np.ndarray] = {}

    def _generic_seed(self, system: SlowFastSystem):
        if self.seed is not None:
            return self.seed
        points = find_fixed_points(system)
        nonzero = [p for p in points if np.max(np.abs(p)) > 1e-8]
        if nonzero or points:
            return (nonzero or points)[0]
        raise ConvergenceError("no fixed point to track")

    def at(self, system: SlowFastSystem, key: float = 0.0) -> np.ndarray:
        info = circuit_info(system)
        if self.seed is None and info and info.fixed_point_seed:
            seed = info.fixed_point_seed(system.params)
            if seed is None:
                raise BranchAbsent(f"tracked fixed point absent at {dict(system.params)!r}")
        else:
            nearest = min(self.roots, key=lambda v: abs(v - key), default=None)
            if nearest is not None and abs(nearest - key) <= self.max_jump:
                seed = self.roots[nearest]
            else:
                seed = self._generic_seed(system)
        res = _newton_fixed_point(system, seed)
        if not res.converged:
            raise ConvergenceError(f"fixed-point tracking failed at {dict(system.params)!r}")
        self.roots[key] = res.x
        return res.x


@dataclass(frozen=True)
class HopfPoint:
    value: float
    fixed_point: np.ndarray
    eigenvalues: np.ndarray
    certified: bool


def _duck_name(system: SlowFastSystem, name: str | None) -> str:
    if name is None:
        info = circuit_info(system)
        if not info or not info.duck:
            raise PreconditionError("a duck parameter name is required for this system")
        name = info.duck
    if name not in system.params:
        raise PreconditionError(f"unknown parameter {name!r}")
    return name


def hopf_certificate(system: SlowFastSystem, fixed_point, re_tol: float = HOPF_RE_TOL):
    eig = np.linalg.eigvals(full_jacobian(system, fixed_point))
    ok = any(abs(z.imag) > 1e-8 and abs(z.real) < re_tol for z in eig)
    return eig, ok


def hopf_point(system: SlowFastSystem, duck_parameter_name: str | None = None,
               bracket: tuple[float, float] | None = None, tol: float = HOPF_TOL,
               seed=None) -> HopfPoint:
    """Root of the last Hurwitz determinant at the tracked fixed point."""
    name = _duck_name(system, duck_parameter_name)
    if bracket is None:
        info = circuit_info(system)
        if not info or not info.hopf_bracket:
            raise PreconditionError("a bracket is required for this system")
        bracket = info.hopf_bracket
    lo, hi = map(float, bracket)
    tracker = FixedPointTracker(seed)

    def det_at(value, trk=tracker):
        s = system.with_params(**{name: value})
        return routh_hurwitz(characteristic_polynomial(s, trk.at(s, value))).determinants[-1]

    def safe_endpoint(value, inward):
        # endpoints are seeded independently so that neither inherits the other's branch
        step = 1e-6 * (hi - lo)
        for _ in range(8):
            try:
                fresh = FixedPointTracker(seed)
                d = det_at(value, fresh)
                tracker.roots.update(fresh.roots)
                return value, d
            except BranchAbsent:
                raise
            except (ConvergenceError, PreconditionError, ZeroDivisionError):
                value += inward * step
                step *= 4.0
        raise ConvergenceError(f"cannot evaluate the Hurwitz determinant near {value!r}")

    lo, f_lo = safe_endpoint(lo, 1.0)
    hi, f_hi = safe_endpoint(hi, -1.0)
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NoSignChange(f"Hurwitz determinant keeps its sign on [{lo!r}, {hi!r}]")
    value = bisect(det_at, lo, hi, tol=tol)
    s = system.with_params(**{name: value})
    fp = tracker.at(s, value)
    eig, ok = hopf_certificate(s, fp)
    if not ok:
        warnings.warn(f"no imaginary eigenpair at the Hopf candidate {value!r}",
                      HopfCertificateWarning, stacklevel=2)
    return HopfPoint(value, fp, eig, ok)


def hopf_parameter(system: SlowFastSystem, duck_parameter_name: str | None = None,
                   bracket: tuple[float, float] | None = None, tol: float = HOPF_TOL) -> float:
    return hopf_point(system, duck_parameter_name, bracket, tol).value


def pseudo_singular_sigma2(system: SlowFastSystem, free_index: int | None = None,
                           free_value: float = 0.0, branch: str = PLUS) -> float:
    points = find_pseudo_singular_points(system, free_index=free_index, free_value=free_value,
                                         exclude_fixed_points=False)
    for p in points:
        if p.sign_branch == branch:
            return classify_folded_singularity(system, p).sigma2
    raise ConvergenceError(f"no {branch} pseudo-singular point")


def saddle_node_value(system: SlowFastSystem, duck_parameter_name: str | None = None,
                      bracket: tuple[float, float] | None = None,
                      free_index: int | None = None, free_value: float = 0.0,
                      tol: float = 1e-12) -> float:
    """Bisection root of ``sigma_2`` at the plus-branch pseudo-singular point."""
    name = _duck_name(system, duck_parameter_name)
    if bracket is None:
        info = circuit_info(system)
        if not info or not info.saddle_bracket:
            raise PreconditionError("a bracket is required for this system")
        bracket = info.saddle_bracket

    def s2(value):
        return pseudo_singular_sigma2(system.with_params(**{name: value}), free_index, free_value)

    return bisect(s2, *bracket, tol=tol)


@dataclass(frozen=True)
class CanardWindow:
    saddle_node_value: float
    hopf_value: float
    window: tuple[float, float]
    duck_parameter_name: str
    upper_closed: bool
    saddle_node_bisection: float | None = None

    def contains(self, value: float) -> bool:
        lo, hi = self.window
        return lo < value and (value <= hi if self.upper_closed else value < hi)

    def as_dict(self) -> dict:
        return {"duck_parameter_name": self.duck_parameter_name,
                "saddle_node_value": self.saddle_node_value,
                "saddle_node_bisection": self.saddle_node_bisection,
                "hopf_value": self.hopf_value, "window": list(self.window),
                "upper_closed": self.upper_closed}


def canard_window(system: SlowFastSystem, duck_parameter_name: str | None = None,
                  scan_bound: float = 1.0, hopf_bracket: tuple[float, float] | None = None,
                  saddle_bracket: tuple[float, float] | None = None,
                  free_index: int | None = None, free_value: float = 0.0,
                  hopf_tol: float = HOPF_TOL) -> CanardWindow:
    """Admissible duck-parameter interval.

    With two slow variables the window is ``(hopf, scan_bound]``; with three
    it is ``(hopf, saddle_node)``. Registered circuits use their closed-form
    saddle-node value and also report the bisection value as a cross-check.
    """
    name = _duck_name(system, duck_parameter_name)
    info = circuit_info(system)
    hopf = hopf_parameter(system, name, hopf_bracket, hopf_tol)
    bisected = None
    try:
        bisected = saddle_node_value(system, name, saddle_bracket, free_index, free_value)
    except (NoSignChange, PreconditionError, ConvergenceError):
        if not (info and info.saddle_node):
            raise
    if info and info.saddle_node and name == info.duck:
        saddle = info.saddle_node(system.params)
    else:
        saddle = bisected
    if system.k == 2:
        return CanardWindow(saddle, hopf, (hopf, float(scan_bound)), name, True, bisected)
    return CanardWindow(saddle, hopf, (hopf, saddle), name, False, bisected)


@dataclass(frozen=True)
class AffineConstraint:
    """``x2_coeff * x2 + alpha2_coeff * alpha2 + constant`` compared with 0."""

    x2_coeff: float
    alpha2_coeff: float
    constant: float
    sense: str  # "<" or ">"

    def value(self, x2: float, alpha2: float) -> float:
        return self.x2_coeff * x2 + self.alpha2_coeff * alpha2 + self.constant

    def signed(self, x2: float, alpha2: float) -> float:
        """Positive when the constraint holds strictly."""
        v = self.value(x2, alpha2)
        return -v if self.sense == "<" else v

    def as_dict(self) -> dict:
        return {"x2": self.x2_coeff, "alpha2": self.alpha2_coeff,
                "constant": self.constant, "sense": self.sense}


INSIDE, BOUNDARY, OUTSIDE = "inside", "boundary", "outside"


@dataclass(frozen=True)
class SaddleRegion:
    """Where both pseudo-singular branches of the 4D circuit are folded saddles."""

    c1: float
    c2: float
    line_plus: AffineConstraint
    line_minus: AffineConstraint
    tol: float = 1e-12

    @property
    def s(self) -> float:
        return math.sqrt(-self.c2 / (3.0 * self.c1))

    @property
    def alpha2_intercept(self) -> float:
        return -2.0 * self.c2 / (2.0 * self.c2 + 3.0)

    @property
    def x2_intercepts(self) -> tuple[float, float]:
        m = 2.0 * self.c2 / 3.0 * self.s
        return (-m, m)

    def membership(self, x2: float, alpha2: float) -> str:
        vals = [c.signed(x2, alpha2) for c in (self.line_plus, self.line_minus)]
        if min(vals) > self.tol:
            return INSIDE
        if min(vals) >= -self.tol:
            return BOUNDARY
        return OUTSIDE

    def contains(self, x2: float, alpha2: float) -> bool:
        return self.membership(x2, alpha2) == INSIDE

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2,
                "line_plus": self.line_plus.as_dict(),
                "line_minus": self.line_minus.as_dict(),
                "alpha2_intercept": self.alpha2_intercept,
                "x2_intercepts": list(self.x2_intercepts)}


def saddle_region(c1: float, c2: float) -> SaddleRegion:
    if not (c1 > 0.0 and c2 < 0.0):
        raise PreconditionError("the saddle region needs c1 > 0 and c2 < 0")
    s = math.sqrt(-c2 / (3.0 * c1))
    m = 2.0 * c2 / 3.0
    plus = AffineConstraint(1.0, (m + 1.0) * s, m * s, "<")
    minus = AffineConstraint(1.0, -(m + 1.0) * s, -m * s, ">")
    return SaddleRegion(float(c1), float(c2), plus, minus)


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    determinants: tuple[float, ...]
    sigma2: float
    stable: bool
    failures: tuple[str, ...] = field(default=())
    notes: tuple[str, ...] = field(default=())


def sweep(system: SlowFastSystem, name: str, values: Sequence[float],
          free_index: int | None = None, free_value: float = 0.0) -> list[SweepRow]:
    """Hurwitz determinants and pseudo-singular ``sigma_2`` along a parameter.

    Runs sequentially so the fixed point is tracked from one value to the next.
    Failed evaluations give NaN entries and a message on the row; a tracked
    branch that does not exist is noted separately and is not a failure.
    """
    name = _duck_name(system, name)
    tracker = FixedPointTracker()
    n_det = system.k
    rows = []
    for v in values:
        s = system.with_params(**{name: float(v)})
        errs = []
        notes = []
        dets, stable = (math.nan,) * n_det, False
        try:
            rh = routh_hurwitz(characteristic_polynomial(s, tracker.at(s, float(v))))
            dets, stable = rh.determinants, rh.stable
        except BranchAbsent as exc:
            notes.append(str(exc))
        except (ConvergenceError, PreconditionError) as exc:
            errs.append(str(exc))
        try:
            s2 = pseudo_singular_sigma2(s, free_index, free_value)
        except ConvergenceError as exc:
            s2 = math.nan
            errs.append(str(exc))
        rows.append(SweepRow(float(v), tuple(dets), s2, stable, tuple(errs), tuple(notes)))
    return rows

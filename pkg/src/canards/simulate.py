"""Integration of the full system and canard detection.

The integrator is the Dormand-Prince 5(4) pair with local extrapolation,
error control in the max norm and the standard quartic dense output. It is
explicit, which is adequate for the moderate stiffness of ``eps ~ 0.1``; a
step-size underflow is raised rather than silently stalling for smaller
``eps``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError, StepSizeUnderflow
from .folded import PseudoSingularity
from .jets import jet_eval
from .system import SLOW_TIME, SlowFastSystem, sample_critical_manifold, solve_on_manifold

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
DIVERGENCE_BOUND = 1e12


@dataclass(frozen=True)
class StepStats:
    accepted: int = 0
    rejected: int = 0
    max_error: float = 0.0
    evaluations: int = 0

    def as_dict(self) -> dict:
        return {"accepted": self.accepted, "rejected": self.rejected,
                "max_error": self.max_error, "evaluations": self.evaluations}


@dataclass(frozen=True)
class Trajectory:
    """Samples of one integration; ``diverged`` marks a truncated run."""

    times: np.ndarray
    states: np.ndarray
    step_stats: StepStats = field(default_factory=StepStats)
    diverged: bool = False

    @classmethod
    def empty(cls, dim: int) -> "Trajectory":
        return cls(np.zeros(0), np.zeros((0, dim)))

    def __len__(self) -> int:
        return len(self.times)


def _initial_step(fun, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = fun(t0 + h0, y0 + h0 * f0)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate(system: SlowFastSystem, initial_state, t_final: float,
              rel_tol: float = 1e-9, abs_tol: float = 1e-11,
              sample_dt: float | None = None, scale: str = SLOW_TIME,
              first_step: float | None = None, max_steps: int = 5_000_000) -> Trajectory:
    """Adaptive Dormand-Prince solution on ``[0, t_final]``.

    With ``sample_dt`` the dense output is sampled at multiples of
    ``sample_dt`` and at ``t_final``; otherwise every accepted step is
    recorded. A non-finite or runaway state stops the run with
    ``diverged=True``.
    """
    if not t_final > 0.0:
        raise PreconditionError("t_final must be positive")
    if not (rel_tol > 0.0 and abs_tol > 0.0):
        raise PreconditionError("tolerances must be positive")
    if sample_dt is not None and not sample_dt > 0.0:
        raise PreconditionError("sample_dt must be positive")
    fun = system.rhs(scale)
    y = np.array(system.check_state(initial_state))
    t = 0.0
    f = fun(t, y)
    nfev = 1
    h = first_step or _initial_step(fun, t, y, f, rel_tol, abs_tol, t_final)
    nfev += 1

    times, states = [0.0], [y.copy()]
    next_i = 1
    accepted = rejected = 0
    max_err = 0.0
    diverged = False
    K = np.empty((7, y.size))

    while t < t_final:
        if accepted + rejected >= max_steps:
            raise StepSizeUnderflow(t, h)
        h = min(h, t_final - t)
        if h < 16.0 * np.spacing(max(abs(t), 1.0)):
            raise StepSizeUnderflow(t, h)
        K[0] = f
        for i in range(1, 6):
            K[i] = fun(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
        y_new = y + h * (_B @ K[:6])
        K[6] = fun(t + h, y_new)
        nfev += 6
        if not np.all(np.isfinite(K)) or not np.all(np.isfinite(y_new)):
            if h < 1e-3 * max(t_final, 1.0) or np.max(np.abs(y)) > DIVERGENCE_BOUND:
                diverged = True
                break
            h *= MIN_FACTOR
            rejected += 1
            continue
        tol = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(h * (_E @ K)) / tol))
        if err <= 1.0:
            t_new = t + h if t_final - (t + h) > 4.0 * np.spacing(t_final) else t_final
            if sample_dt is None:
                times.append(t_new)
                states.append(y_new.copy())
            else:
                Q = K.T @ _P
                while True:
                    ts = next_i * sample_dt
                    if ts > t_new * (1.0 + 1e-14) or ts > t_final:
                        break
                    theta = (ts - t) / h
                    y_s = y + h * (Q @ (theta ** np.arange(1, 5)))
                    times.append(ts)
                    states.append(y_s)
                    next_i += 1
                if t_new == t_final and times[-1] < t_final:
                    times.append(t_final)
                    states.append(y_new.copy())
                elif t_new == t_final:
                    states[-1] = y_new.copy()
            t, y, f = t_new, y_new, K[6].copy()
            accepted += 1
            max_err = max(max_err, err)
            if np.max(np.abs(y)) > DIVERGENCE_BOUND:
                diverged = True
                break
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
        else:
            rejected += 1
            factor = max(MIN_FACTOR, SAFETY * err ** -0.2)
        h *= factor

    stats = StepStats(accepted, rejected, max_err, nfev)
    return Trajectory(np.array(times), np.array(states), stats, diverged)


ATTRACTING, REPELLING = "attracting", "repelling"


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    branch: str
    mean_abs_g: float

    def as_dict(self) -> dict:
        return {"t_start": self.t_start, "t_end": self.t_end,
                "branch": self.branch, "mean_abs_g": self.mean_abs_g}


@dataclass(frozen=True)
class CanardSegments:
    segments: tuple[Segment, ...]
    repelling_time: float
    delta: float

    def as_dict(self) -> dict:
        return {"delta": self.delta, "repelling_time": self.repelling_time,
                "segments": [s.as_dict() for s in self.segments]}


def detect_canard(trajectory: Trajectory, system: SlowFastSystem,
                  delta: float = 0.05) -> CanardSegments:
    """Split the near-manifold part of a trajectory by sheet stability.

    A sample with ``|g_1| < delta`` is on the attracting sheet when
    ``dg_1/dy_1 < 0`` and on the repelling sheet otherwise. Runs of equally
    labelled samples form segments; ``repelling_time`` is the total duration
    of repelling segments.
    """
    p = system.params
    k = system.k
    labels = []
    gabs = []
    for state in trajectory.states:
        try:
            j = jet_eval(system.fast_field, state, p)
        except DomainError:
            # exactly on a kink the sheet stability is undefined
            labels.append(None)
            gabs.append(abs(float(system.fast_field(state.tolist(), p))))
            continue
        if abs(j.value) < delta:
            labels.append(ATTRACTING if j.gradient[k] < 0.0 else REPELLING)
        else:
            labels.append(None)
        gabs.append(abs(j.value))

    segments = []
    start = None
    for i, lab in enumerate(labels + [None]):
        if start is not None and lab != labels[start]:
            seg = slice(start, i)
            segments.append(Segment(float(trajectory.times[start]),
                                    float(trajectory.times[i - 1]), labels[start],
                                    float(np.mean(gabs[seg]))))
            start = None
        if start is None and lab is not None:
            start = i
    rep = sum(s.t_end - s.t_start for s in segments if s.branch == REPELLING)
    return CanardSegments(tuple(segments), float(rep), float(delta))


def canard_initial_state(system: SlowFastSystem, psp, offset: float = 1e-3) -> np.ndarray:
    """A pseudo-singular point nudged onto the attracting sheet.

    The fast coordinate moves by ``offset`` in the direction where
    ``dg_1/dy_1`` becomes negative, then ``x_1`` is re-solved onto M0.
    """
    state = psp.array if isinstance(psp, PseudoSingularity) else np.asarray(psp, dtype=float)
    g = jet_eval(system.fast_field, state, system.params)
    k = system.k
    gyy = g.hessian[k, k]
    direction = -1.0 if gyy > 0.0 else 1.0
    start = state.copy()
    start[k] += direction * offset
    return solve_on_manifold(system, start, 0)


def format_float(v: float) -> str:
    """Shortest round-trip representation."""
    return repr(float(v))


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([format_float(v) for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class PlotBundle:
    """Named tables ready for plotting; one CSV per entry."""

    tables: dict[str, Table]

    def write(self, directory) -> list[Path]:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in sorted(self.tables):
            path = out / f"{name}.csv"
            path.write_text(self.tables[name].to_csv(), encoding="utf-8")
            paths.append(path)
        return paths


def default_mesh_ranges(system: SlowFastSystem):
    """Grid over the free coordinates (all but ``x_1``) and its resolution."""
    if system.k == 2:
        return [(-3.0, 3.0), (-2.5, 2.5)], [41, 41]
    return [(0.0, 0.0), (-1.5, 1.5), (-2.0, 2.0)], [1, 31, 41]


def emit_manifold_and_orbit(system: SlowFastSystem, trajectory: Trajectory | None = None,
                            ranges: Sequence[tuple[float, float]] | None = None,
                            resolution: Sequence[int] | int | None = None,
                            psps: Sequence[PseudoSingularity] = ()) -> PlotBundle:
    """Critical-manifold mesh, orbit samples and pseudo-singular markers.

    Full-coordinate tables are always produced. For three slow variables the
    ``(x1, x3, y1)`` and ``(x1, y1)`` projections are added.
    """
    if ranges is None:
        ranges, default_res = default_mesh_ranges(system)
        resolution = default_res if resolution is None else resolution
    elif resolution is None:
        resolution = 41
    labels = tuple(system.labels)
    mesh = sample_critical_manifold(system, ranges, resolution)
    tables = {"manifold": Table(labels, mesh.valid_states())}
    if psps:
        tables["pseudo_singular"] = Table(labels, np.array([p.state for p in psps]))
    has_orbit = trajectory is not None and len(trajectory) > 0
    if has_orbit:
        rows = np.column_stack([trajectory.times, trajectory.states])
        tables["trajectory"] = Table(("t",) + labels, rows)
    if system.k == 3:
        for cols in ((0, 2, 3), (0, 3)):
            suffix = "_".join(labels[c] for c in cols)
            head = tuple(labels[c] for c in cols)
            tables[f"manifold_{suffix}"] = Table(head, mesh.valid_states()[:, cols])
            if has_orbit:
                tables[f"trajectory_{suffix}"] = Table(head, trajectory.states[:, cols])
    return PlotBundle(tables)


def final_half_variance(trajectory: Trajectory) -> float:
    """Summed per-coordinate variance over the second half of the samples."""
    half = trajectory.states[len(trajectory) // 2:]
    return float(np.sum(np.var(half, axis=0)))


def endpoint_difference(a: Trajectory, b: Trajectory) -> float:
    return float(np.max(np.abs(a.states[-1] - b.states[-1])))


def manifold_arrival_time(trajectory: Trajectory, system: SlowFastSystem,
                          delta: float = 0.05) -> float:
    """First sample time with ``|g_1| < delta``; ``inf`` if never reached."""
    for t, s in zip(trajectory.times, trajectory.states):
        if abs(system.fast_field(s.tolist(), system.params)) < delta:
            return float(t)
    return math.inf

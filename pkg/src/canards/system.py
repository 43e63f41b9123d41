"""Slow-fast systems with k slow variables and one fast variable.

The state is ordered ``(x_1, ..., x_k, y_1)``. In slow time the system reads

    x_i' = f_i(x, y),    eps * y_1' = g_1(x, y),

and in fast time every slow component is multiplied by ``eps`` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, FoldError, PreconditionError
from .jets import Field, Jet2, as_jet, jet_eval_many

SLOW_TIME = "slow"
FAST_TIME = "fast"

MANIFOLD_TOL = 1e-10
FOLD_TOL = 1e-12


@dataclass(frozen=True)
class SlowFastSystem:
    """``k`` slow fields, one fast field, named parameters and ``epsilon``.

    ``circuit`` names a built-in circuit (see :mod:`canards.circuits`) and is
    ``None`` for user-supplied systems.
    """

    slow_fields: tuple[Field, ...]
    fast_field: Field
    params: Mapping[str, float]
    epsilon: float
    circuit: str | None = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "slow_fields", tuple(self.slow_fields))
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        k = len(self.slow_fields)
        if k not in (2, 3):
            raise PreconditionError(f"k must be 2 or 3, got {k}")
        if not self.epsilon > 0.0:
            raise PreconditionError(f"epsilon must be positive, got {self.epsilon!r}")
        if not self.labels:
            names = tuple(f"x{i + 1}" for i in range(k)) + ("y1",)
            object.__setattr__(self, "labels", names)

    @property
    def k(self) -> int:
        return len(self.slow_fields)

    @property
    def dim(self) -> int:
        return self.k + 1

    @property
    def fast_index(self) -> int:
        return self.k

    @property
    def fields(self) -> tuple[Field, ...]:
        return self.slow_fields + (self.fast_field,)

    def with_params(self, **updates: float) -> "SlowFastSystem":
        unknown = set(updates) - set(self.params)
        if unknown:
            raise PreconditionError(f"unknown parameter(s): {sorted(unknown)}")
        return replace(self, params={**self.params, **updates})

    def with_epsilon(self, epsilon: float) -> "SlowFastSystem":
        return replace(self, epsilon=epsilon)

    def check_state(self, state) -> list[float]:
        x = [float(v) for v in state]
        if len(x) != self.dim:
            raise PreconditionError(f"state must have length {self.dim}, got {len(x)}")
        return x

    def vector_field(self, state) -> np.ndarray:
        """``(f_1, ..., f_k, g_1)`` at ``state``."""
        x = self.check_state(state)
        p = self.params
        return np.array([float(f(x, p)) for f in self.fields])

    def jets(self, state) -> list[Jet2]:
        """Jets of ``f_1, ..., f_k, g_1`` on shared seeds at ``state``."""
        return jet_eval_many(self.fields, self.check_state(state), self.params)

    def rhs(self, scale: str = SLOW_TIME):
        """Return ``rhs(t, y)`` suitable for an ODE integrator."""
        fields, p, eps = self.fields, self.params, self.epsilon
        k = self.k
        if scale == SLOW_TIME:
            inv = 1.0 / eps

            def slow(t, y):
                x = y.tolist()
                out = [f(x, p) for f in fields]
                out[k] *= inv
                return np.array(out, dtype=float)
            return slow
        if scale == FAST_TIME:
            def fast(t, y):
                x = y.tolist()
                out = [eps * f(x, p) for f in fields[:k]]
                out.append(fields[k](x, p))
                return np.array(out, dtype=float)
            return fast
        raise PreconditionError(f"unknown time scale {scale!r}")


def eval_rhs(system: SlowFastSystem, state, scale: str = SLOW_TIME) -> np.ndarray:
    """Right-hand side in slow time ``(f, g/eps)`` or fast time ``(eps*f, g)``."""
    v = system.vector_field(state)
    if scale == SLOW_TIME:
        v[-1] /= system.epsilon
    elif scale == FAST_TIME:
        v[:-1] *= system.epsilon
    else:
        raise PreconditionError(f"unknown time scale {scale!r}")
    return v


def critical_residual(system: SlowFastSystem, state) -> float:
    """``g_1(state)``; zero exactly on the critical manifold."""
    return float(system.fast_field(system.check_state(state), system.params))


def solve_on_manifold(system: SlowFastSystem, state, solve_index: int = 0,
                      tol: float = MANIFOLD_TOL, max_iter: int = 50) -> np.ndarray:
    """Newton on one coordinate so that ``g_1 = 0`` with the others held fixed."""
    x = np.array(system.check_state(state))
    for _ in range(max_iter):
        # only the solved coordinate is seeded, so kinks in the others are harmless
        args = x.tolist()
        args[solve_index] = Jet2.variable(x[solve_index], 0, 1)
        j = as_jet(system.fast_field(args, system.params), 1)
        if abs(j.value) < tol:
            return x
        slope = j.gradient[0]
        if slope == 0.0:
            break
        x[solve_index] -= j.value / slope
    if abs(critical_residual(system, x)) < tol:
        return x
    raise ConvergenceError(f"manifold Newton did not converge from {list(state)!r}")


@dataclass(frozen=True)
class ManifoldMesh:
    """Grid samples of the critical manifold in row-major order.

    ``states`` has one row per grid node; nodes where the solve failed hold
    NaN and are listed in ``failures`` as ``(node_index, message)``.
    """

    shape: tuple[int, ...]
    free_indices: tuple[int, ...]
    solve_index: int
    states: np.ndarray
    failures: tuple[tuple[int, str], ...] = ()

    def valid_states(self) -> np.ndarray:
        return self.states[~np.isnan(self.states).any(axis=1)]


def sample_critical_manifold(system: SlowFastSystem,
                             ranges: Sequence[tuple[float, float]],
                             resolution: int | Sequence[int],
                             solve_index: int = 0,
                             tol: float = MANIFOLD_TOL) -> ManifoldMesh:
    """Sample M0 as a graph over every coordinate except ``solve_index``.

    ``ranges`` lists one interval per free coordinate in increasing index
    order; the last free coordinate varies fastest.
    """
    free = tuple(i for i in range(system.dim) if i != solve_index)
    if len(ranges) != len(free):
        raise PreconditionError(f"expected {len(free)} ranges, got {len(ranges)}")
    counts = [resolution] * len(free) if isinstance(resolution, int) else list(resolution)
    if len(counts) != len(free) or min(counts) < 1:
        raise PreconditionError("resolution must give a positive count per free coordinate")
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(ranges, counts)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(free))

    states = np.full((grid.shape[0], system.dim), np.nan)
    failures = []
    guess = 0.0
    for node, values in enumerate(grid):
        start = np.zeros(system.dim)
        start[list(free)] = values
        start[solve_index] = guess
        try:
            s = solve_on_manifold(system, start, solve_index, tol)
        except ConvergenceError as exc:
            failures.append((node, str(exc)))
            continue
        states[node] = s
        guess = s[solve_index]
    return ManifoldMesh(tuple(counts), free, solve_index, states, tuple(failures))


def reduced_flow(system: SlowFastSystem, state, fold_tol: float = FOLD_TOL,
                 manifold_tol: float = 1e-8) -> np.ndarray:
    """Constrained slow flow on M0: ``(f, -(sum_i g_xi f_i) / g_y)``."""
    jets = system.jets(state)
    g = jets[-1]
    if abs(g.value) >= manifold_tol:
        raise PreconditionError(f"state is off the critical manifold (g1={g.value!r})")
    k = system.k
    gy = g.gradient[k]
    if abs(gy) < fold_tol:
        raise FoldError(f"dg1/dy1 = {gy!r} vanishes: state lies on the fold")
    f = np.array([j.value for j in jets[:k]])
    return np.append(f, -float(g.gradient[:k] @ f) / gy)

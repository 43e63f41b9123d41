"""Built-in memristor circuits and the JSON system descriptor.

Every builder returns a :class:`SlowFastSystem` in the ``(x_1, ..., x_k, y_1)``
ordering. The circuits are usually written in the original circuit variables;
:func:`to_state` and :func:`from_state` convert between the two orderings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .characteristic import CHUA4D_C1, CHUA4D_C2, CubicFit, fit_cubic, pwl_charge
from .errors import PreconditionError
from .system import SlowFastSystem

CHUA3D_CUBIC = "chua3d_cubic"
CHUA3D_PWL = "chua3d_pwl"
CHUA3D_PARTICULAR = "chua3d_particular"
CHUA4D_CUBIC = "chua4d_cubic"

DEFAULT_FIT = (-2.0, 4.0, 3.0)


# 3D cubic: x1' = y1 - x2, x2' = beta x1 + gamma x2, eps y1' = -x1 - (c1 y1^3 + c2 y1)
def _f1_3d(x, p):
    return x[2] - x[1]


def _f2_3d(x, p):
    return p["beta"] * x[0] + p["gamma"] * x[1]


def _g_3d_cubic(x, p):
    y = x[2]
    return -x[0] - (p["c1"] * y ** 3 + p["c2"] * y)


def _g_3d_pwl(x, p):
    return -x[0] - pwl_charge(x[2], p["a"], p["b"])


def _f2_particular(x, p):
    return p["alpha"] * (x[0] + x[1])


def _g_particular(x, p):
    y = x[2]
    return -x[0] - (y ** 3 / 3.0 - y)


# 4D: x1' = b1 (x3 - x1 - y1), x2' = b2 x3, x3' = -x2 - a2 x3 - x1, eps y1' = x1 - (c1 y1^3 + c2 y1)
def _f1_4d(x, p):
    return p["beta1"] * (x[2] - x[0] - x[3])


def _f2_4d(x, p):
    return p["beta2"] * x[2]


def _f3_4d(x, p):
    return -x[1] - p["alpha2"] * x[2] - x[0]


def _g_4d(x, p):
    y = x[3]
    return x[0] - (p["c1"] * y ** 3 + p["c2"] * y)


@dataclass(frozen=True)
class CircuitInfo:
    """Registry entry for a built-in circuit.

    ``duck`` names the canard control parameter. ``saddle_node`` and
    ``fixed_point_seed`` are closed forms used for windows and for tracking the
    fixed point whose Hurwitz determinant detects the Hopf value.
    """

    name: str
    k: int
    defaults: Mapping[str, float]
    epsilon: float
    smooth: bool
    duck: str | None = None
    positive: tuple[str, ...] = ()
    free_index: int | None = None
    saddle_node: Callable[[Mapping[str, float]], float] | None = None
    saddle_bracket: tuple[float, float] | None = None
    hopf_bracket: tuple[float, float] | None = None
    fixed_point_seed: Callable[[Mapping[str, float]], np.ndarray | None] | None = None


def _seed_3d(p):
    beta, gamma, c1, c2 = p["beta"], p["gamma"], p["c1"], p["c2"]
    rad = (gamma - c2 * beta) / (c1 * beta)
    if not rad > 0.0:
        return None
    r = math.sqrt(rad)
    return np.array([gamma / beta * r, -r, -r])


def _seed_particular(p):
    r = math.sqrt(6.0)
    return np.array([r, -r, -r])


_DEFAULT_C1, _DEFAULT_C2 = fit_cubic(*DEFAULT_FIT).c1, fit_cubic(*DEFAULT_FIT).c2

REGISTRY: dict[str, CircuitInfo] = {
    CHUA3D_CUBIC: CircuitInfo(
        CHUA3D_CUBIC, 2,
        {"beta": 0.47, "gamma": 0.3275, "c1": _DEFAULT_C1, "c2": _DEFAULT_C2},
        0.1, True, duck="gamma", positive=("beta",),
        saddle_node=lambda p: 2.0 * p["beta"] * p["c2"] / 3.0,
        saddle_bracket=(-1.0, 1.0), hopf_bracket=(-0.3, 1.0),
        fixed_point_seed=_seed_3d),
    CHUA3D_PWL: CircuitInfo(
        CHUA3D_PWL, 2, {"beta": 0.47, "gamma": 0.47, "a": -2.0, "b": 4.0},
        0.1, False, positive=("beta",)),
    CHUA3D_PARTICULAR: CircuitInfo(
        CHUA3D_PARTICULAR, 2, {"alpha": 0.3}, 0.1, True, duck="alpha",
        saddle_node=lambda p: 0.0, saddle_bracket=(-1.0, 1.0), hopf_bracket=(0.0, 1.0),
        fixed_point_seed=_seed_particular),
    CHUA4D_CUBIC: CircuitInfo(
        CHUA4D_CUBIC, 3,
        {"beta1": 0.121, "beta2": 0.0047, "alpha2": 0.1, "c1": CHUA4D_C1, "c2": CHUA4D_C2},
        1.0 / 10.1428, True, duck="alpha2", positive=("beta1", "beta2"), free_index=1,
        saddle_node=lambda p: -2.0 * p["c2"] / (3.0 + 2.0 * p["c2"]),
        saddle_bracket=(0.0, 1.5), hopf_bracket=(0.0, 0.9),
        fixed_point_seed=lambda p: np.zeros(4)),
}

_FIELDS = {
    CHUA3D_CUBIC: ((_f1_3d, _f2_3d), _g_3d_cubic),
    CHUA3D_PWL: ((_f1_3d, _f2_3d), _g_3d_pwl),
    CHUA3D_PARTICULAR: ((_f1_3d, _f2_particular), _g_particular),
    CHUA4D_CUBIC: ((_f1_4d, _f2_4d, _f3_4d), _g_4d),
}


def circuit_info(system_or_name) -> CircuitInfo | None:
    name = system_or_name if isinstance(system_or_name, str) else system_or_name.circuit
    return REGISTRY.get(name) if name else None


def build(name: str, params: Mapping[str, float] | None = None,
          epsilon: float | None = None) -> SlowFastSystem:
    """Build a registered circuit; missing parameters take their defaults."""
    info = REGISTRY.get(name)
    if info is None:
        raise PreconditionError(f"unknown circuit {name!r}; expected one of {sorted(REGISTRY)}")
    params = dict(params or {})
    unknown = set(params) - set(info.defaults)
    if unknown:
        raise PreconditionError(f"unknown parameter(s) for {name}: {sorted(unknown)}")
    merged = {**info.defaults, **{k: float(v) for k, v in params.items()}}
    for key, value in merged.items():
        if not math.isfinite(value):
            raise PreconditionError(f"parameter {key} must be finite")
    for key in info.positive:
        if not merged[key] > 0.0:
            raise PreconditionError(f"parameter {key} must be positive, got {merged[key]!r}")
    eps = info.epsilon if epsilon is None else float(epsilon)
    slow, fast = _FIELDS[name]
    return SlowFastSystem(slow, fast, merged, eps, circuit=name)


def chua3d_cubic(epsilon: float | None = None, **params: float) -> SlowFastSystem:
    return build(CHUA3D_CUBIC, params, epsilon)


def chua3d_pwl(epsilon: float | None = None, **params: float) -> SlowFastSystem:
    return build(CHUA3D_PWL, params, epsilon)


def chua3d_particular(epsilon: float | None = None, **params: float) -> SlowFastSystem:
    return build(CHUA3D_PARTICULAR, params, epsilon)


def chua4d_cubic(epsilon: float | None = None, **params: float) -> SlowFastSystem:
    return build(CHUA4D_CUBIC, params, epsilon)


def to_state(name: str, original) -> np.ndarray:
    """Original circuit variables to ``(x_1, ..., y_1)``.

    3D circuits take ``(x, y, z)`` and return ``(-y, z, x)``; the 4D circuit
    takes ``(x, y, z, u)`` and returns ``(y, u, z, x)``.
    """
    o = np.asarray(original, dtype=float)
    if REGISTRY[name].k == 2:
        x, y, z = o
        return np.array([-y, z, x])
    x, y, z, u = o
    return np.array([y, u, z, x])


def from_state(name: str, state) -> np.ndarray:
    s = np.asarray(state, dtype=float)
    if REGISTRY[name].k == 2:
        x1, x2, y1 = s
        return np.array([y1, -x1, x2])
    x1, x2, x3, y1 = s
    return np.array([y1, x1, x3, x2])


@dataclass(frozen=True)
class Descriptor:
    """A parsed system descriptor together with its provenance fit."""

    system: SlowFastSystem
    fit: CubicFit | None

    def as_dict(self) -> dict:
        return {"circuit": self.system.circuit, "params": dict(self.system.params),
                "epsilon": self.system.epsilon}


_FIT_KEYS = ("a", "b", "d")


def parse_descriptor(data: Mapping) -> Descriptor:
    """Build a system from ``{"circuit": ..., "params": {...}, "epsilon": e}``.

    For ``chua3d_cubic`` the cubic coefficients may instead be given through
    the PWL slopes and interval ``a``, ``b``, ``d``, which are then fitted.
    """
    if not isinstance(data, Mapping):
        raise PreconditionError("descriptor must be a JSON object")
    extra = set(data) - {"circuit", "params", "epsilon"}
    if extra:
        raise PreconditionError(f"unknown descriptor key(s): {sorted(extra)}")
    if "circuit" not in data:
        raise PreconditionError("descriptor needs a 'circuit' entry")
    name = data["circuit"]
    params = data.get("params", {}) or {}
    if not isinstance(params, Mapping):
        raise PreconditionError("'params' must be an object")
    for key, value in params.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise PreconditionError(f"parameter {key} must be a number")
    epsilon = data.get("epsilon")
    if epsilon is not None and (isinstance(epsilon, bool) or not isinstance(epsilon, (int, float))):
        raise PreconditionError("'epsilon' must be a number")

    params = dict(params)
    fit = None
    if name == CHUA3D_CUBIC:
        given = {k: params.pop(k) for k in _FIT_KEYS if k in params}
        if given and ("c1" in params or "c2" in params):
            raise PreconditionError("give either c1/c2 or the fit inputs a/b/d, not both")
        if given or ("c1" not in params and "c2" not in params):
            a, b, d = (float(given.get(k, v)) for k, v in zip(_FIT_KEYS, DEFAULT_FIT))
            fit = fit_cubic(a, b, d)
            params["c1"], params["c2"] = fit.c1, fit.c2
    return Descriptor(build(name, params, epsilon), fit)

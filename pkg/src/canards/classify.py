"""Classification of folded singularities.

The normalized slow dynamics rescales the constrained flow by ``-dg_1/dy_1``:

    F_i = -f_i * dg_1/dy_1,    G_1 = sum_j dg_1/dx_j * f_j.

At a pseudo-singular point its Jacobian has ``k - 1`` zero eigenvalues. The
remaining pair solves ``lambda**2 - sigma_1 lambda + sigma_2 = 0``, where
``sigma_i`` is the sum of the ``i x i`` principal minors. A negative
``sigma_2`` (real eigenvalues of opposite sign) is a folded saddle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import PreconditionError
from .folded import PseudoSingularity
from .system import SlowFastSystem

DEGENERATE_TOL = 1e-12

FOLDED_SADDLE = "folded-saddle"
FOLDED_NODE = "folded-node"
FOLDED_FOCUS = "folded-focus"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class SigmaReport:
    sigma1: float
    sigma2: float
    sigma3: float
    sigma4: float | None
    delta: float
    lambda1: complex | float
    lambda2: complex | float
    kind: str

    @property
    def is_saddle(self) -> bool:
        return self.kind == FOLDED_SADDLE

    def as_dict(self) -> dict:
        def lam(v):
            return [v.real, v.imag] if isinstance(v, complex) else [v, 0.0]
        return {"sigma1": self.sigma1, "sigma2": self.sigma2, "sigma3": self.sigma3,
                "sigma4": self.sigma4, "delta": self.delta,
                "lambda1": lam(self.lambda1), "lambda2": lam(self.lambda2),
                "kind": self.kind}


@dataclass(frozen=True)
class NormalFormCoefficients:
    a_coeff: float
    b_coeff: float
    tilde: bool

    def as_dict(self) -> dict:
        key = "a_tilde" if self.tilde else "a"
        return {key: self.a_coeff, "b_tilde" if self.tilde else "b": self.b_coeff}


def _state(psp) -> np.ndarray:
    return psp.array if isinstance(psp, PseudoSingularity) else np.asarray(psp, dtype=float)


def normalized_slow_jacobian(system: SlowFastSystem, psp) -> np.ndarray:
    """Jacobian of ``(F_1, ..., F_k, G_1)`` assembled from jets."""
    jets = system.jets(_state(psp))
    g = jets[-1]
    k = system.k
    gy = g.gradient[k]
    dgy = g.hessian[k]
    rows = [-(gy * jets[i].gradient + jets[i].value * dgy) for i in range(k)]
    rows.append(sum(g.gradient[j] * jets[j].gradient + jets[j].value * g.hessian[j]
                    for j in range(k)))
    return np.vstack(rows)


def determinant(m: np.ndarray) -> float:
    """Laplace expansion along the first row; intended for n <= 4."""
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    if n == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    total = 0.0
    for j in range(n):
        if m[0, j] != 0.0:
            minor = np.delete(m[1:], j, axis=1)
            total += (-1.0) ** j * m[0, j] * determinant(minor)
    return total


def principal_minor_sums(m: np.ndarray) -> list[float]:
    """``[E_1, ..., E_n]`` with ``E_i`` the sum of the ``i x i`` principal minors."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    return [sum(determinant(m[np.ix_(idx, idx)]) for idx in combinations(range(n), i))
            for i in range(1, n + 1)]


def classify_pair(sigma1: float, sigma2: float, delta: float) -> str:
    if abs(sigma2) < DEGENERATE_TOL:
        return DEGENERATE
    if sigma2 < 0.0:
        return FOLDED_SADDLE
    return FOLDED_NODE if delta >= 0.0 else FOLDED_FOCUS


def sigma_invariants(J) -> SigmaReport:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] not in (3, 4):
        raise PreconditionError(f"expected a 3x3 or 4x4 matrix, got shape {J.shape}")
    e = principal_minor_sums(J)
    s1, s2 = e[0], e[1]
    delta = s1 * s1 - 4.0 * s2
    if delta >= 0.0:
        r = math.sqrt(delta)
        l1, l2 = 0.5 * (s1 + r), 0.5 * (s1 - r)
    else:
        r = cmath.sqrt(delta)
        l1, l2 = 0.5 * (s1 + r), 0.5 * (s1 - r)
    return SigmaReport(s1, s2, e[2], e[3] if len(e) > 3 else None, delta, l1, l2,
                       classify_pair(s1, s2, delta))


def benoit_a(f2, f1_x2, f1_y, g_x1, g_x2x2, g_x2y, g_yy) -> float:
    """Normal-form coefficient ``a`` for two slow variables."""
    return (0.5 * f2 * f2 * (g_x2x2 * g_yy - g_x2y * g_x2y)
            + 0.5 * f2 * g_x1 * (g_yy * f1_x2 - g_x2y * f1_y))


def benoit_a_tilde(f2, f3, f1_x2, f1_x3, f1_y, g_x1,
                   g_x2x2, g_x3x3, g_x2x3, g_x2y, g_x3y, g_yy) -> float:
    """Normal-form coefficient ``a~`` for three slow variables."""
    return (benoit_a(f2, f1_x2, f1_y, g_x1, g_x2x2, g_x2y, g_yy)
            + 0.5 * f3 * f3 * (g_x3x3 * g_yy - g_x3y * g_x3y)
            + 0.5 * f3 * g_x1 * (g_yy * f1_x3 - g_x3y * f1_y)
            + f2 * f3 * (g_x2x3 * g_yy - g_x2y * g_x3y))


def benoit_b(g_x1, f1_y) -> float:
    return -g_x1 * f1_y


def normal_form_coefficients(system: SlowFastSystem, psp) -> NormalFormCoefficients:
    jets = system.jets(_state(psp))
    g = jets[-1]
    k = system.k
    dg, H = g.gradient, g.hessian
    df1 = jets[0].gradient
    b = benoit_b(dg[0], df1[k])
    if k == 2:
        a = benoit_a(jets[1].value, df1[1], df1[k], dg[0], H[1, 1], H[1, k], H[k, k])
        return NormalFormCoefficients(float(a), float(b), False)
    a = benoit_a_tilde(jets[1].value, jets[2].value, df1[1], df1[2], df1[k], dg[0],
                       H[1, 1], H[2, 2], H[1, 2], H[1, k], H[2, k], H[k, k])
    return NormalFormCoefficients(float(a), float(b), True)


def classify_folded_singularity(system: SlowFastSystem, psp) -> SigmaReport:
    return sigma_invariants(normalized_slow_jacobian(system, psp))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canards.characteristic import (CHUA4D_C1, CHUA4D_C2, adaptive_simpson, cubic_charge,
                                    fit_cubic, pwl_charge, square_error)
from canards.errors import PreconditionError

# exact value of the optimal square error for (a, b, d) = (-2, 4, 3), integrated symbolically
S_OPT = 736 / 243


def test_pwl_charge_values():
    assert pwl_charge(0.0, -2, 4) == 0.0
    assert pwl_charge(1.0, -2, 4) == -2.0
    assert pwl_charge(3.0, -2, 4) == 6.0
    assert pwl_charge(-3.0, -2, 4) == -6.0


def test_cubic_charge_values():
    fit = fit_cubic(-2, 4, 3)
    assert cubic_charge(0.0, fit) == 0.0
    assert cubic_charge(1.0, fit) == pytest.approx(float(Fraction(280, 729) - Fraction(26, 27)), abs=1e-15)
    assert cubic_charge(-0.8, fit) == -cubic_charge(0.8, fit)


def test_fit_matches_exact_fractions():
    fit = fit_cubic(-2, 4, 3)
    assert abs(fit.c1 - 280 / 729) < 1e-12
    assert abs(fit.c2 - (-26 / 27)) < 1e-12
    assert fit.residual == pytest.approx(S_OPT, abs=1e-9)


def test_no_slope_break_is_exact():
    fit = fit_cubic(1, 1, 2)
    assert fit.c1 == 0.0 and fit.c2 == 1.0
    assert square_error(1, 1, 2, 0.0, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_d_must_exceed_one():
    with pytest.raises(PreconditionError):
        fit_cubic(-2, 4, 0.5)
    with pytest.raises(PreconditionError):
        fit_cubic(-2, 4, 1.0)


def test_residual_equals_square_error():
    fit = fit_cubic(-2, 4, 3)
    assert square_error(-2, 4, 3, fit.c1, fit.c2) == fit.residual


def test_perturbation_increases_error():
    fit = fit_cubic(-2, 4, 3)
    for dc1, dc2 in [(0, 1e-3), (0, -1e-3), (1e-3, 0), (-1e-3, 0)]:
        assert square_error(-2, 4, 3, fit.c1 + dc1, fit.c2 + dc2) > fit.residual


def _quadrature_minimizer(a, b, d):
    """Minimize the quadrature-evaluated error by fitting its exact quadratic form."""
    probes = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 1.0)]
    rows, rhs = [], []
    for u, v in probes:
        rows.append([u * u, v * v, u * v, u, v, 1.0])
        rhs.append(square_error(a, b, d, u, v, tol=1e-13))
    A, B, C, D, E, _ = np.linalg.solve(np.array(rows), np.array(rhs))
    return np.linalg.solve([[2 * A, C], [C, 2 * B]], [-D, -E])


def test_minimizer_oracle_for_d2():
    fit = fit_cubic(-2, 4, 2)
    c = _quadrature_minimizer(-2, 4, 2)
    assert abs(c[0] - fit.c1) < 1e-8 and abs(c[1] - fit.c2) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(1.05, 6))
def test_stationarity(a, b, d):
    fit = fit_cubic(a, b, d)
    h = 1e-4
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        up = square_error(a, b, d, *(np.array([fit.c1, fit.c2]) + e), tol=1e-13)
        dn = square_error(a, b, d, *(np.array([fit.c1, fit.c2]) - e), tol=1e-13)
        assert abs((up - dn) / (2 * h)) < 1e-6


@pytest.mark.xfail(strict=True, reason="cubic extremum value is -0.587 against the PWL value -2; "
                   "only the locations coincide")
def test_extrema_values_within_ten_percent():
    fit = fit_cubic(-2, 4, 3)
    phi = np.sqrt(-fit.c2 / (3 * fit.c1))
    pwl = pwl_charge(1.0, -2, 4)
    assert abs(cubic_charge(phi, fit) - pwl) <= 0.1 * abs(pwl)


def test_extrema_locations_within_ten_percent():
    fit = fit_cubic(-2, 4, 3)
    phi = np.sqrt(-fit.c2 / (3 * fit.c1))
    assert phi == pytest.approx(0.9141741003300661, abs=1e-15)
    assert abs(phi - 1.0) < 0.1


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4))
def test_odd_symmetry(phi):
    fit = fit_cubic(-2, 4, 3)
    assert pwl_charge(-phi, -2, 4) == pytest.approx(-pwl_charge(phi, -2, 4), abs=1e-12)
    assert cubic_charge(-phi, fit) == pytest.approx(-cubic_charge(phi, fit), abs=1e-12)


def test_adaptive_simpson_polynomial_and_smooth():
    assert adaptive_simpson(lambda x: x ** 3 - x, 0.0, 2.0) == pytest.approx(2.0, abs=1e-13)
    assert adaptive_simpson(np.sin, 0.0, np.pi, tol=1e-12) == pytest.approx(2.0, abs=1e-11)


def test_adaptive_simpson_tolerance_below_rounding_terminates():
    # x**6 on [0, 6] has magnitude ~5e4, so an absolute 1e-13 is below rounding
    got = adaptive_simpson(lambda x: x ** 6, 0.0, 6.0, tol=1e-13)
    assert got == pytest.approx(6.0 ** 7 / 7, rel=1e-13)


def test_4d_preset_is_verbatim():
    assert CHUA4D_C1 == 0.393781 and CHUA4D_C2 == -0.72357

import math

import numpy as np
import pytest

from canards import circuits
from canards.errors import ConvergenceError, PreconditionError
from canards.folded import (MINUS, PLUS, PseudoSingularity, find_pseudo_singular_points,
                            fold_seeds, folded_residuals, genericity_check,
                            pseudo_singular_manifold)
from canards.system import SlowFastSystem

C1, C2 = 280 / 729, -26 / 27
S3 = math.sqrt(-C2 / (3 * C1))  # 3*sqrt(455)/70
C1_4, C2_4 = 0.393781, -0.72357
S4 = math.sqrt(-C2_4 / (3 * C1_4))


def closed_form_3d(c1, c2):
    s = math.sqrt(-c2 / (3 * c1))
    m = 2 * c2 / 3
    return np.array([-m * s, s, s]), np.array([m * s, -s, -s])


def closed_form_4d(c1, c2, x2):
    s = math.sqrt(-c2 / (3 * c1))
    m = 2 * c2 / 3
    return np.array([m * s, x2, (m + 1) * s, s]), np.array([-m * s, x2, -(m + 1) * s, -s])


def assert_residuals(system, p):
    r, _ = folded_residuals(system, p.state)
    assert np.max(np.abs(r)) < 1e-10


def test_3d_points_match_closed_form(cubic3d):
    pts = find_pseudo_singular_points(cubic3d)
    assert [p.sign_branch for p in pts] == [PLUS, MINUS]
    plus, minus = closed_form_3d(C1, C2)
    np.testing.assert_allclose(pts[0].array, plus, atol=1e-9)
    np.testing.assert_allclose(pts[1].array, minus, atol=1e-9)
    # frozen digits from the exact value s = 3 sqrt(455) / 70
    np.testing.assert_allclose(pts[0].array, [0.5868772002118943, 0.9141741003300661,
                                              0.9141741003300661], atol=1e-12)
    for p in pts:
        assert p.free_index is None
        assert_residuals(cubic3d, p)


def test_3d_points_independent_of_gamma(cubic3d):
    ref = find_pseudo_singular_points(cubic3d.with_params(gamma=0.0))
    for gamma in (0.3, 0.9):
        pts = find_pseudo_singular_points(cubic3d.with_params(gamma=gamma))
        for a, b in zip(ref, pts):
            assert np.max(np.abs(a.array - b.array)) < 1e-12


def test_particular_points(particular):
    pts = find_pseudo_singular_points(particular)
    np.testing.assert_allclose(pts[0].array, [2 / 3, 1, 1], atol=1e-12)
    np.testing.assert_allclose(pts[1].array, [-2 / 3, -1, -1], atol=1e-12)


def test_4d_manifold_point(cubic4d):
    plus, minus = closed_form_4d(C1_4, C2_4, 0.0)
    p = pseudo_singular_manifold(cubic4d, 1, 0.0, PLUS)
    np.testing.assert_allclose(p.array, plus, atol=1e-10)
    assert p.free_index == 1
    assert p.state[2] == pytest.approx(p.state[0] + p.state[3], abs=1e-12)
    q = pseudo_singular_manifold(cubic4d, 1, 0.0, MINUS)
    np.testing.assert_allclose(q.array, minus, atol=1e-10)
    np.testing.assert_allclose(plus, [-0.377521389834012, 0.0, 0.405101002955929,
                                      0.782622392789941], atol=1e-12)
    assert_residuals(cubic4d, p)


def test_4d_free_value_changes_only_free_coordinate(cubic4d):
    base = pseudo_singular_manifold(cubic4d, 1, 0.0).array
    for v in (-2.0, 0.7, 5.0):
        p = pseudo_singular_manifold(cubic4d, 1, v).array
        assert p[1] == v
        np.testing.assert_allclose(np.delete(p, 1), np.delete(base, 1), atol=1e-10)


def test_4d_requires_k3(cubic3d, cubic4d):
    with pytest.raises(PreconditionError):
        pseudo_singular_manifold(cubic3d, 1, 0.0)
    with pytest.raises(PreconditionError):
        find_pseudo_singular_points(cubic4d, free_index=3)


def test_fold_seeds_lie_on_fold(cubic3d):
    seeds = fold_seeds(cubic3d)
    assert len(seeds) == 2
    for s in seeds:
        r, _ = folded_residuals(cubic3d, s)
        assert abs(r[0]) < 1e-10 and abs(r[1]) < 1e-10


def test_bad_seeds_are_reported(cubic3d):
    notes = []
    pts = find_pseudo_singular_points(cubic3d, seeds=[[50.0, -80.0, 30.0]], report=notes)
    good = find_pseudo_singular_points(cubic3d)
    for p in pts:
        assert any(np.max(np.abs(p.array - q.array)) < 1e-9 for q in good)
    assert pts or notes


def test_duplicates_are_merged(cubic3d):
    plus, _ = closed_form_3d(C1, C2)
    pts = find_pseudo_singular_points(cubic3d, seeds=[plus, plus + 1e-4, plus - 1e-4])
    assert len(pts) == 1


def test_fixed_point_candidates_are_discarded(cubic3d):
    # at the saddle-node value the pseudo-singular point is also a fixed point
    s = cubic3d.with_params(gamma=2 * 0.47 * C2 / 3)
    notes = []
    assert find_pseudo_singular_points(s, report=notes) == []
    assert any("fixed point" in n for n in notes)
    kept = find_pseudo_singular_points(s, exclude_fixed_points=False)
    assert len(kept) == 2


def test_genericity(cubic3d, cubic4d):
    for p in find_pseudo_singular_points(cubic3d):
        rep = genericity_check(cubic3d, p)
        assert rep.all_pass
        assert rep.dg1_dx1 == -1.0
        assert rep.d2g1_dy1sq == pytest.approx(-6 * C1 * p.state[2], rel=1e-14)
        assert rep.f2_value == pytest.approx(0.47 * p.state[0] + 0.3275 * p.state[1], rel=1e-14)
    rep = genericity_check(cubic4d, pseudo_singular_manifold(cubic4d, 1, 0.0))
    assert rep.all_pass and rep.dg1_dx1 == 1.0


def test_degenerate_fold_fails_genericity():
    s = SlowFastSystem((lambda x, p: x[1] + 1.0, lambda x, p: 1.0 + 0 * x[0]),
                       lambda x, p: x[2] ** 3 - x[0], {}, 0.1)
    rep = genericity_check(s, PseudoSingularity((0.0, 0.0, 0.0), None, PLUS))
    assert rep.d2g1_dy1sq == 0.0 and not rep.all_pass
    assert rep.as_dict()["all_pass"] is False

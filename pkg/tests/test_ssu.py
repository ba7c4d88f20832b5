import numpy as np
import pytest

from phivar import (build_frames, build_quadrature, check_p_ssu,
                    check_phi_ssu, ellipsoid_chart,
                    ellipsoid_curvature_bounds, hypersurface_p_criterion,
                    hypersurface_phi_criterion, phi_form, q_operator,
                    sphere_chart)
from phivar.ssu import random_shape_operator, synthetic_hypersurface_point


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_sphere_stability_form_is_scalar(n):
    fp = build_frames(sphere_chart(n), sphere_chart(n).random_params(
        np.random.default_rng(0), 1)[0])
    G = phi_form(fp).matrix
    assert np.allclose(G, (4.0 - n) * np.eye(n), atol=1e-6)
    Q = q_operator(fp).matrix
    assert np.allclose(Q, (2.0 - n) * np.eye(n), atol=1e-6)


@pytest.mark.parametrize("n,expected", [(2, False), (3, False), (4, False),
                                        (5, True), (6, True)])
def test_sphere_verdict_flips_at_dimension_five(n, expected):
    chart = sphere_chart(n)
    quad = build_quadrature(chart, [2] * (n - 1) + [4])
    verdict = check_phi_ssu(chart, quad)
    assert verdict.is_ssu is expected
    assert verdict.worst_value == pytest.approx(4.0 - n, abs=1e-6)
    if n == 4:
        assert verdict.marginal


def test_sphere_witness_is_usable():
    chart = sphere_chart(3)
    verdict = check_phi_ssu(chart, build_quadrature(chart, [3, 3, 6]))
    assert not verdict.is_ssu
    x = np.asarray(verdict.witness_direction)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-8)
    y = chart.eval(np.asarray(verdict.witness_point))
    assert np.linalg.norm(y) == pytest.approx(1.0, abs=1e-8)


def test_hypersurface_shortcut_matches_definiteness():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 8))
        A = random_shape_operator(n, rng)
        lams = np.linalg.eigvalsh(A)
        fp = synthetic_hypersurface_point(A)
        G = phi_form(fp).matrix
        neg_def = bool(np.max(np.linalg.eigvalsh(G)) < 0.0)
        assert hypersurface_phi_criterion(lams) == neg_def


def test_quartic_search_agrees_with_p_criterion():
    rng = np.random.default_rng(6)
    p = 3.0
    for _ in range(15):
        n = int(rng.integers(2, 7))
        A = random_shape_operator(n, rng)
        fp = synthetic_hypersurface_point(A)
        verdict = check_p_ssu(fp, p, seed=0)
        expected = hypersurface_p_criterion(np.linalg.eigvalsh(A), p)
        assert verdict.is_ssu == expected


def test_sphere_curvature_bounds_are_tight():
    kmin, kmax = ellipsoid_curvature_bounds([1.0, 1.0, 1.0])
    assert kmin == pytest.approx(1.0)
    assert kmax == pytest.approx(1.0)


def test_ellipsoid_principal_curvatures_within_bounds():
    axes = [1.0, 1.4, 0.7, 1.1]
    chart = ellipsoid_chart(axes)
    kmin, kmax = ellipsoid_curvature_bounds(axes)
    rng = np.random.default_rng(7)
    fb = build_quadrature(chart, [6, 6, 12]).frames
    for i in rng.integers(0, len(fb), 40):
        fp = fb.point(int(i))
        lams = np.linalg.eigvalsh(fp.sff[0])
        assert np.all(lams >= kmin - 1e-8)
        assert np.all(lams <= kmax + 1e-8)

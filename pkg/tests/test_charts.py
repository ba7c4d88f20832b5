import numpy as np
import pytest
from scipy.special import gamma

from phivar import (ConfigError, build_frames_batch, build_quadrature,
                    chart_from_config, ellipsoid_chart, grid_shape,
                    hypersurface_frames_at, paraboloid_chart,
                    principal_curvatures, sphere_chart, torus_chart)
from phivar.charts import build_frames


def sphere_volume(n):
    return 2.0 * np.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sphere_quadrature_volume(n):
    chart = sphere_chart(n)
    quad = build_quadrature(chart, [12] * (n - 1) + [24])
    assert quad.total_volume == pytest.approx(sphere_volume(n), rel=1e-10)


def test_torus_volume():
    chart = torus_chart(3)
    quad = build_quadrature(chart, [12, 12, 12])
    assert quad.total_volume == pytest.approx((2 * np.pi) ** 3, rel=1e-12)


def test_monte_carlo_quadrature_volume():
    chart = sphere_chart(3)
    quad = build_quadrature(chart, None, scheme="monte_carlo", seed=0,
                            n_samples=40_000)
    assert quad.total_volume == pytest.approx(sphere_volume(3), rel=5e-3)


@pytest.mark.parametrize("chart", [sphere_chart(3),
                                   ellipsoid_chart([1.0, 1.2, 0.9, 1.1])])
def test_frames_orthonormal_and_adapted(chart):
    rng = np.random.default_rng(0)
    params = chart.random_params(rng, 50)
    fb = build_frames_batch(chart, params)
    T, N = fb.tangent_frame, fb.normal_frame
    gram = np.einsum("...qi,...qj->...ij", T, T)
    assert np.allclose(gram, np.eye(chart.param_dim), atol=1e-10)
    cross = np.einsum("...qi,...qv->...iv", T, N)
    assert np.allclose(cross, 0.0, atol=1e-8)


def test_sphere_shape_operator_is_identity():
    chart = sphere_chart(4)
    rng = np.random.default_rng(1)
    fb = build_frames_batch(chart, chart.random_params(rng, 20))
    assert np.allclose(fb.sff[:, 0], np.eye(4)[None], atol=1e-7)


def test_hypersurface_frames_from_ambient_point():
    chart = ellipsoid_chart([1.0, 1.3, 0.8])
    rng = np.random.default_rng(2)
    y = chart.eval(chart.random_params(rng, 10))
    T, nu, A = hypersurface_frames_at(chart, y)
    # frames orthonormal and normal to the tangent space
    assert np.allclose(np.einsum("...qi,...qj->...ij", T, T),
                       np.eye(2)[None], atol=1e-9)
    assert np.allclose(np.einsum("...qi,...qv->...iv", T, nu), 0.0, atol=1e-7)
    # shape operators symmetric with the mean-curvature orientation
    assert np.allclose(A, np.swapaxes(A, -1, -2), atol=1e-6)
    assert np.all(np.trace(A[:, 0], axis1=-2, axis2=-1) >= 0.0)


def test_principal_curvatures_of_sphere():
    fp = build_frames(sphere_chart(3), np.array([0.9, 1.1, 0.3]))
    assert np.allclose(principal_curvatures(fp), 1.0, atol=1e-8)


@pytest.mark.parametrize("chart", [sphere_chart(2), torus_chart(2),
                                   paraboloid_chart(2)])
def test_params_of_inverts_eval(chart):
    rng = np.random.default_rng(3)
    params = chart.random_params(rng, 30)
    y = chart.eval(params)
    assert np.allclose(chart.eval(chart.params_of(y)), y, atol=1e-9)


def test_projection_is_idempotent_on_surface_points():
    chart = ellipsoid_chart([1.0, 1.2, 0.9])
    rng = np.random.default_rng(4)
    y = chart.eval(chart.random_params(rng, 20))
    assert np.allclose(chart.project(y + 0.05), chart.project(chart.project(y + 0.05)),
                       atol=1e-9)


def test_grid_shape_roundtrip():
    chart = sphere_chart(3)
    quad = build_quadrature(chart, [5, 6, 7])
    assert grid_shape(quad) == (5, 6, 7)
    assert len(quad) == 5 * 6 * 7


def test_chart_config_parsing():
    chart = chart_from_config({"kind": "sphere", "dim": 4})
    assert chart.param_dim == 4 and chart.ambient_dim == 5
    ell = chart_from_config({"kind": "ellipsoid", "axes": [1.0, 2.0, 0.5]})
    assert ell.ambient_dim == 3
    with pytest.raises(ConfigError):
        chart_from_config({"kind": "sphere", "dim": 4, "extra": 1})
    with pytest.raises(ConfigError):
        chart_from_config({"kind": "dodecahedron"})
    with pytest.raises(ConfigError):
        chart_from_config({"dim": 4})


def test_monte_carlo_requires_seed():
    with pytest.raises(ConfigError):
        build_quadrature(sphere_chart(2), None, scheme="monte_carlo",
                         n_samples=100)

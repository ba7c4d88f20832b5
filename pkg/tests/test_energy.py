import numpy as np
import pytest
from scipy.special import gamma

from phivar import (ConfigError, NotPhiHarmonic, ambient_variation,
                    average_second_variation_domain,
                    average_second_variation_target, build_quadrature,
                    callback_variation, constant_map, circle_power_map,
                    energy, fd_first_variation, fd_second_variation,
                    first_variation, harmonicity_residual, identity_map,
                    map_from_config, p_energy, phi_energy, second_variation,
                    sphere_chart, tension_sup_norm, warped_circle_map)
from phivar.maps import GridMap


def sphere_volume(n):
    return 2.0 * np.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)


def circle_setup():
    dom = sphere_chart(1)
    return dom, build_quadrature(dom, [160])


@pytest.mark.parametrize("n", [2, 3, 5])
def test_identity_map_energies(n):
    chart = sphere_chart(n)
    quad = build_quadrature(chart, [12] * (n - 1) + [24])
    mp = identity_map(chart, quad)
    vol = sphere_volume(n)
    # constant densities: e = n/2 for the Dirichlet energy, n/4 for the
    # quartic energy
    assert energy(mp) == pytest.approx(0.5 * n * vol, rel=1e-9)
    assert phi_energy(mp) == pytest.approx(0.25 * n * vol, rel=1e-9)


def test_identity_s5_quartic_energy_closed_form():
    chart = sphere_chart(5)
    quad = build_quadrature(chart, [12] * 4 + [24])
    assert phi_energy(identity_map(chart, quad)) == pytest.approx(
        1.25 * np.pi ** 3, rel=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_circle_power_map_energies(k):
    dom, quad = circle_setup()
    mp = circle_power_map(dom, quad, dom, k)
    assert phi_energy(mp) == pytest.approx(0.5 * np.pi * k ** 4, rel=1e-8)
    assert energy(mp) == pytest.approx(np.pi * k ** 2, rel=1e-8)
    assert p_energy(mp, 3.0) == pytest.approx(2.0 * np.pi * k ** 3 / 3.0,
                                              rel=1e-8)


def test_constant_map_is_trivial_critical_point():
    dom, quad = circle_setup()
    tgt = sphere_chart(3)
    mp = constant_map(dom, quad, tgt, np.array([0.0, 0.0, 0.0, 1.0]))
    assert phi_energy(mp) == pytest.approx(0.0, abs=1e-20)
    assert energy(mp) == pytest.approx(0.0, abs=1e-20)
    assert tension_sup_norm(mp) == pytest.approx(0.0, abs=1e-8)


def test_identity_map_is_critical():
    chart = sphere_chart(2)
    quad = build_quadrature(chart, [12, 24])
    mp = identity_map(chart, quad)
    assert harmonicity_residual(mp) < 1e-6


def test_map_config_parsing_and_errors():
    mp = map_from_config({"kind": "circle_power", "k": 2,
                          "target": {"kind": "sphere", "dim": 1},
                          "grid": [80]})
    assert phi_energy(mp) == pytest.approx(8.0 * np.pi, rel=1e-8)
    with pytest.raises(ConfigError):
        map_from_config({"kind": "unheard_of"})
    with pytest.raises(ConfigError):
        map_from_config({"kind": "circle_power", "k": 2, "bogus": 1})


def test_first_variation_matches_finite_differences():
    dom, quad = circle_setup()
    mp = warped_circle_map(dom, quad, dom, amplitude=0.3)
    var = ambient_variation(np.array([1.0, 0.0]))
    an, fd = first_variation(mp, var), fd_first_variation(mp, var)
    assert fd == pytest.approx(an, rel=1e-6)
    assert abs(an) > 0.1  # genuinely nonzero slope


def test_first_variation_with_callback_field():
    chart = sphere_chart(3)
    quad = build_quadrature(chart, [10, 10, 20])
    mp = map_from_config({"kind": "latitude", "colatitude": 1.0,
                          "target": {"kind": "sphere", "dim": 3},
                          "grid": [96]})

    def field(params, y):
        w = np.stack([np.sin(y[..., 1] + 0.5) + 0.3, y[..., 0],
                      np.cos(y[..., 0]), 0.2 * np.ones(y.shape[:-1])],
                     axis=-1)
        return w

    var = callback_variation(field)
    an, fd = first_variation(mp, var), fd_first_variation(mp, var)
    assert fd == pytest.approx(an, rel=1e-5)


def test_second_variation_matches_finite_differences():
    dom, quad = circle_setup()
    mp = warped_circle_map(dom, quad, dom, amplitude=0.3)
    var = ambient_variation(np.array([1.0, 0.0]))
    an, fd = second_variation(mp, var), fd_second_variation(mp, var)
    assert fd == pytest.approx(an, rel=1e-4)


def test_identity_second_variation_sign_flip():
    # conformal directions destabilize the identity exactly above
    # dimension four; converged value is (4 - n) n Vol(S^n)/(n + 1)
    for n, res in ((3, 8), (5, 10)):
        chart = sphere_chart(n)
        quad = build_quadrature(chart, [res] * (n - 1) + [2 * res])
        mp = identity_map(chart, quad)
        var = ambient_variation(np.eye(n + 1)[0])
        exact = (4.0 - n) * n * sphere_volume(n) / (n + 1.0)
        assert second_variation(mp, var) == pytest.approx(exact, rel=2e-3)


def test_average_target_identity_on_degree_two_circle_map():
    dom, quad = circle_setup()
    mp = circle_power_map(dom, quad, dom, 2)
    lhs, rhs = average_second_variation_target(mp)
    assert lhs == pytest.approx(rhs, rel=1e-3)
    assert abs(rhs) > 1.0


def test_average_target_vanishes_for_constant_map():
    dom, quad = circle_setup()
    mp = constant_map(dom, quad, sphere_chart(2),
                      np.array([0.0, 0.0, 1.0]))
    lhs, rhs = average_second_variation_target(mp)
    assert abs(lhs) < 1e-10 and abs(rhs) < 1e-10


def test_average_domain_identity_on_s2():
    chart = sphere_chart(2)
    quad = build_quadrature(chart, [8, 16])
    mp = identity_map(chart, quad)
    lhs, rhs = average_second_variation_domain(mp)
    # closed form: n(4 - n) Vol(S^n) = 16 pi for n = 2
    assert rhs == pytest.approx(16.0 * np.pi, rel=1e-9)
    assert lhs == pytest.approx(rhs, rel=1e-3)


def test_average_domain_rejects_non_critical_maps():
    dom, quad = circle_setup()
    mp = warped_circle_map(dom, quad, dom, amplitude=0.3)
    with pytest.raises(NotPhiHarmonic):
        average_second_variation_domain(mp)


def test_grid_map_validation():
    dom, quad = circle_setup()
    tgt = sphere_chart(2)
    with pytest.raises(ValueError):
        GridMap(dom, quad, tgt, np.zeros((3, 3)))
    pts = np.tile(np.array([1.0, 0.0, 0.0]), (len(quad), 1))
    gm = GridMap(dom, quad, tgt, pts)
    assert phi_energy(gm) == pytest.approx(0.0, abs=1e-20)

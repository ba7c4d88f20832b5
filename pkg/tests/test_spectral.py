import json

import numpy as np
import pytest

from phivar import (ConfigError, build_quadrature, conformal_dirichlet_value,
                    conformal_gradient_field, eigen_gradient_field,
                    hessian_quadratic_form, killing_field, load_spectrum,
                    p_index_nullity, phi_index_nullity, phi_unstable_criterion,
                    sphere_chart, sphere_harmonic_multiplicity,
                    sphere_spectrum, spectrum_from_config, spectrum_to_config,
                    theorem91_table)


def test_harmonic_multiplicities():
    # classical values: 2l+1 on the two-sphere
    assert [sphere_harmonic_multiplicity(2, k) for k in range(5)] == \
        [1, 3, 5, 7, 9]
    assert sphere_harmonic_multiplicity(5, 1) == 6
    assert sphere_harmonic_multiplicity(5, 2) == 20
    assert sphere_harmonic_multiplicity(4, 2) == 14


def test_sphere_spectrum_model():
    spec = sphere_spectrum(5)
    assert spec.dim == 5
    assert spec.einstein_c == pytest.approx(4.0)
    assert spec.isometry_dim == 15
    assert spec.lambda_1 == pytest.approx(5.0)
    assert spec.eigenpairs[0] == (5.0, 6)


@pytest.mark.parametrize("n,expected", [(2, (0, 3)), (4, (0, 15)),
                                        (5, (6, 15)), (6, (7, 21))])
def test_quartic_index_and_nullity(n, expected):
    assert phi_index_nullity(sphere_spectrum(n)) == expected


def test_p_index_and_nullity():
    assert p_index_nullity(sphere_spectrum(2), 2.0) == (0, 6)
    assert p_index_nullity(sphere_spectrum(5), 2.0) == (6, 15)
    with pytest.raises(Exception):
        p_index_nullity(sphere_spectrum(3), 1.0)


def test_instability_criterion_flips_at_dimension_five():
    flags = [phi_unstable_criterion(sphere_spectrum(n)) for n in range(2, 8)]
    assert flags == [False, False, False, True, True, True]


def test_spectrum_config_roundtrip(tmp_path):
    spec = sphere_spectrum(5, k_max=3)
    cfg = spectrum_to_config(spec)
    assert spectrum_from_config(cfg) == spec
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(cfg))
    assert load_spectrum(str(path)) == spec
    with pytest.raises(ConfigError):
        spectrum_from_config({**cfg, "surprise": 1})
    bad = dict(cfg)
    del bad["dim"]
    with pytest.raises(ConfigError):
        spectrum_from_config(bad)


def test_killing_fields_are_hessian_null():
    chart = sphere_chart(2)
    quad = build_quadrature(chart, [16, 32])
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        v = killing_field(chart, i, j)
        vals, scale = hessian_quadratic_form(chart, quad, v, with_scale=True)
        assert max(abs(x) for x in vals) < 1e-4 * scale


def test_conformal_field_hessian_closed_form():
    # (4 - m) m Vol(S^m)/(m + 1): positive below dimension four, negative
    # above
    chart = sphere_chart(3)
    quad = build_quadrature(chart, [16, 16, 32])
    v = conformal_gradient_field(chart, np.eye(4)[1])
    exact = 1.0 * 3.0 * 2.0 * np.pi ** 2 / 4.0
    vals = hessian_quadratic_form(chart, quad, v)
    for x in vals:
        assert x == pytest.approx(exact, rel=1e-2)
    assert conformal_dirichlet_value(chart, quad, v) == pytest.approx(
        exact, rel=1e-6)


def test_four_hessian_expressions_agree_on_generic_field():
    chart = sphere_chart(5)
    quad = build_quadrature(chart, [8] * 4 + [16])

    def fn(y):
        return np.stack([np.cos(y[..., (a + 1) % 6]) for a in range(6)],
                        axis=-1)

    from phivar import custom_field
    v = custom_field(chart, fn)
    vals, scale = hessian_quadratic_form(chart, quad, v, with_scale=True)
    spread = (max(vals) - min(vals)) / max(max(abs(x) for x in vals), scale)
    assert spread < 1e-2


def test_index_count_matches_negative_conformal_directions():
    # the six coordinate conformal fields realize the full unstable space
    # of the identity on S^5
    chart = sphere_chart(5)
    quad = build_quadrature(chart, [6] * 4 + [12])
    negatives = 0
    for a in range(6):
        v = conformal_gradient_field(chart, np.eye(6)[a])
        vals = hessian_quadratic_form(chart, quad, v)
        if all(x < 0.0 for x in vals):
            negatives += 1
    index, _ = phi_index_nullity(sphere_spectrum(5))
    assert negatives == index == 6


def test_eigen_gradient_matches_conformal_on_sphere():
    chart = sphere_chart(4)
    quad = build_quadrature(chart, [8, 8, 8, 16])
    v1 = conformal_gradient_field(chart, np.eye(5)[2])
    v2 = eigen_gradient_field(chart, 2)
    y = chart.eval(chart.random_params(np.random.default_rng(0), 10))
    assert np.allclose(v1.evaluate(y), v2.evaluate(y), atol=1e-10)


def test_equivalence_table_small_dimensions():
    rows = theorem91_table(range(2, 5))
    assert [r["n"] for r in rows] == [2, 3, 4]
    assert all(r["consistent"] for r in rows)
    assert not any(r["phi_ssu"] for r in rows)
    assert not any(r["spectral_criterion"] for r in rows)

"""Spectral stability data for the identity map.

The Hessian of the quartic energy at the identity map of an Einstein
manifold reduces to a quadratic form phi(v) on vector fields, expressible
in four ways that agree after integration by parts.  Its index and
nullity follow from the Laplace spectrum: eigenvalues below the threshold
4c/3 (c the Einstein constant) contribute their multiplicity to the
index, and Killing fields plus threshold eigenfields span the null space.
The p-energy analogue uses the threshold 2mc/(m + p - 2).
"""

import json
from dataclasses import dataclass
from math import comb

import numpy as np

from .charts import tangent_frames_batch
from .errors import ConfigError
from .variations import geodesic_endpoint

THRESHOLD_TOL = 1e-12


@dataclass(frozen=True)
class SpectrumModel:
    """Positive Laplace eigenvalues with multiplicities on an Einstein
    manifold, plus the curvature and isometry data the index formulas use."""

    dim: int
    einstein_c: float
    isometry_dim: int
    eigenpairs: tuple

    def __post_init__(self):
        pairs = tuple((float(lam), int(mult)) for lam, mult in self.eigenpairs)
        object.__setattr__(self, "eigenpairs", pairs)
        lams = [lam for lam, _ in pairs]
        if any(lam <= 0.0 for lam in lams):
            raise ConfigError("eigenvalues must be positive")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ConfigError("eigenvalues must be strictly increasing")
        if any(mult < 1 for _, mult in pairs):
            raise ConfigError("multiplicities must be >= 1")
        if self.dim < 1 or self.isometry_dim < 0:
            raise ConfigError("invalid dimensions")

    @property
    def scal(self):
        """Scalar curvature m * c of the Einstein metric Ric = c g."""
        return self.dim * self.einstein_c

    @property
    def lambda_1(self):
        return self.eigenpairs[0][0]


def spectrum_from_config(cfg):
    """Build a SpectrumModel from a JSON-style dict, e.g.
    {"dim": 5, "c": 4, "isometry_dim": 15, "eigenpairs": [[5, 6], [12, 20]]}."""
    if not isinstance(cfg, dict):
        raise ConfigError("spectrum config must be an object")
    allowed = {"dim", "c", "isometry_dim", "eigenpairs"}
    extra = set(cfg) - allowed
    if extra:
        raise ConfigError(f"unknown spectrum keys {sorted(extra)}")
    missing = allowed - set(cfg)
    if missing:
        raise ConfigError(f"missing spectrum keys {sorted(missing)}")
    try:
        pairs = tuple((float(lam), int(mult)) for lam, mult in cfg["eigenpairs"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("eigenpairs must be [lambda, multiplicity] pairs") from exc
    return SpectrumModel(dim=int(cfg["dim"]), einstein_c=float(cfg["c"]),
                         isometry_dim=int(cfg["isometry_dim"]),
                         eigenpairs=pairs)


def spectrum_to_config(spec):
    return {"dim": spec.dim, "c": spec.einstein_c,
            "isometry_dim": spec.isometry_dim,
            "eigenpairs": [[lam, mult] for lam, mult in spec.eigenpairs]}


def load_spectrum(path):
    with open(path) as f:
        return spectrum_from_config(json.load(f))


def sphere_harmonic_multiplicity(n, k):
    """Dimension of degree-k harmonic homogeneous polynomials in n+1
    variables (the k-th sphere eigenspace)."""
    return comb(n + k, k) - (comb(n + k - 2, k - 2) if k >= 2 else 0)


def sphere_spectrum(n, k_max=6):
    """Laplace spectrum of the unit n-sphere up to degree k_max:
    lambda_k = k(k + n - 1), Einstein constant n - 1, isometry dimension
    n(n+1)/2."""
    if n < 1 or k_max < 1:
        raise ConfigError("need n >= 1 and k_max >= 1")
    pairs = tuple((float(k * (k + n - 1)), sphere_harmonic_multiplicity(n, k))
                  for k in range(1, k_max + 1))
    return SpectrumModel(dim=n, einstein_c=float(n - 1),
                         isometry_dim=n * (n + 1) // 2, eigenpairs=pairs)


# ---------------------------------------------------------------------------
# index counting


def _count_below_and_at(eigenpairs, threshold, tol=THRESHOLD_TOL):
    below = sum(m for lam, m in eigenpairs if lam < threshold - tol)
    at = sum(m for lam, m in eigenpairs if abs(lam - threshold) <= tol)
    return below, at


def phi_unstable_criterion(spec):
    """Identity-map instability test lambda_1 < 4 Scal / (3m), strict."""
    return bool(spec.lambda_1 < 4.0 * spec.scal / (3.0 * spec.dim)
                - THRESHOLD_TOL)


def phi_index_nullity(spec):
    """Index and nullity of the identity map's quartic-energy Hessian:
    multiplicities below the threshold 4c/3 count toward the index; the
    null space is Killing fields plus eigenfields exactly at threshold."""
    threshold = 4.0 * spec.einstein_c / 3.0
    below, at = _count_below_and_at(spec.eigenpairs, threshold)
    return below, spec.isometry_dim + at


def p_index_nullity(spec, p):
    """Same counting for the p-energy with threshold 2mc/(m + p - 2)."""
    if p <= 1:
        raise ValueError("p must be > 1")
    m = spec.dim
    threshold = 2.0 * m * spec.einstein_c / (m + p - 2.0)
    below, at = _count_below_and_at(spec.eigenpairs, threshold)
    return below, spec.isometry_dim + at


# ---------------------------------------------------------------------------
# vector fields and the Hessian quadratic form


@dataclass(frozen=True, eq=False)
class VectorFieldOnManifold:
    """Tangent vector field given by an ambient-valued callback; values
    are projected onto the tangent space on evaluation."""

    chart: object
    fn: object
    kind: str = "custom"

    def evaluate(self, at):
        """Tangent value at ambient points (..., q) or a framed sample."""
        y = at.position if hasattr(at, "position") else np.asarray(at, dtype=float)
        return self.chart.tangent_project_vector(y, self.fn(y))


def killing_field(chart, i, j):
    """Rotation generator y_j e_i - y_i e_j of the ambient (i, j)-plane;
    an isometry generator on spheres."""

    def fn(y):
        out = np.zeros_like(y)
        out[..., i] = y[..., j]
        out[..., j] = -y[..., i]
        return out

    return VectorFieldOnManifold(chart, fn, kind=f"killing({i},{j})")


def conformal_gradient_field(chart, direction):
    """Tangential projection of a constant ambient vector; on the sphere
    this is the gradient of the linear height function, a nonisometric
    conformal field."""
    a = np.asarray(direction, dtype=float)

    def fn(y):
        return np.broadcast_to(a, y.shape).copy()

    return VectorFieldOnManifold(chart, fn, kind="conformal_gradient")


def eigen_gradient_field(chart, index):
    """Gradient of the index-th first-eigenfunction (ambient coordinate
    restricted to the sphere)."""
    a = np.zeros(chart.ambient_dim)
    a[index] = 1.0
    return VectorFieldOnManifold(chart, lambda y: np.broadcast_to(
        a, y.shape).copy(), kind=f"eigen_gradient({index})")


def custom_field(chart, fn, description="custom"):
    return VectorFieldOnManifold(chart, fn, kind=description)


def _einstein_constant(chart):
    if chart.kind == "sphere":
        return float(chart.param_dim - 1)
    if chart.kind == "torus":
        return 0.0
    raise ConfigError(
        "Einstein constant unknown for this chart; pass einstein_c")


def _tangent_frame_at(chart, y):
    """Orthonormal tangent frame at ambient points, avoiding parameter
    charts where a closed-form unit normal exists."""
    if chart.ambient_dim - chart.param_dim == 1:
        nu = chart.unit_normal(y)
        if nu is not None:
            return np.linalg.qr(nu[..., :, None], mode="complete")[0][..., 1:]
    return tangent_frames_batch(chart, chart.params_of(y))[1]


def _divergence_at(chart, v, y, h):
    """div v at ambient points y by geodesic central differences."""
    T = _tangent_frame_at(chart, y)
    div = 0.0
    for i in range(T.shape[-1]):
        ei = T[..., i]
        d = 0.0
        for hh, wgt in ((h, -1.0 / 3.0), (h / 2.0, 4.0 / 3.0)):
            wp = v.evaluate(geodesic_endpoint(chart, y, ei, hh))
            wm = v.evaluate(geodesic_endpoint(chart, y, ei, -hh))
            d = d + wgt * (wp - wm) / (2.0 * hh)
        # <P_y d, e_i> = <d, e_i> since e_i is tangent
        div = div + np.einsum("...q,...q->...", d, ei)
    return div


def hessian_quadratic_form(chart, quad, v, einstein_c=None, h=1e-3,
                           with_scale=False):
    """Identity-map Hessian value phi(v) in its four quadrature forms.

    Covariant derivatives of v are finite differences along geodesics from
    each node; the divergence derivative v(div v) and the rough Laplacian
    use nested stencils.  Ricci enters analytically as Ric = c g.  The
    four returned values agree within about 1e-3 relative (they are equal
    after integration by parts).  With with_scale=True, also returns the
    positive gradient-term integral as a magnitude reference.
    """
    c = _einstein_constant(chart) if einstein_c is None else float(einstein_c)
    pos = chart.eval(quad.params)
    # every integrand below is frame-invariant, so any orthonormal tangent
    # frame works; build it pole-free where a closed-form normal exists
    E = _tangent_frame_at(chart, pos)
    m = chart.param_dim
    v0 = v.evaluate(pos)

    grads = []          # nabla_{e_i} v, (N, q) each
    lap = np.zeros_like(v0)
    for i in range(m):
        ei = E[..., i]
        yp, yp2 = (geodesic_endpoint(chart, pos, ei, t) for t in (h, 2 * h))
        ym, ym2 = (geodesic_endpoint(chart, pos, ei, -t) for t in (h, 2 * h))
        wp, wp2 = v.evaluate(yp), v.evaluate(yp2)
        wm, wm2 = v.evaluate(ym), v.evaluate(ym2)
        d1 = (wm2 - 8.0 * wm + 8.0 * wp - wp2) / (12.0 * h)
        grads.append(chart.tangent_project_vector(pos, d1))
        # second covariant derivative along the geodesic: inner velocities
        # at +-h, projected there, differenced at the center
        up = chart.tangent_project_vector(yp, (wp2 - v0) / (2.0 * h))
        um = chart.tangent_project_vector(ym, (v0 - wm2) / (2.0 * h))
        lap = lap + chart.tangent_project_vector(pos, (up - um) / (2.0 * h))
    G = np.stack(grads, axis=1)  # (N, m, q)

    gradsq = np.einsum("...iq,...iq->...", G, G)
    M = np.einsum("...iq,...qj->...ij", G, E)  # <nabla_i v, e_j>
    div = np.trace(M, axis1=-2, axis2=-1)
    L = M + np.swapaxes(M, -1, -2)
    lie_sq = np.einsum("...ij,...ij->...", L, L)

    # v(div v): directional derivative of the divergence along v
    def div_along(t):
        return _divergence_at(chart, v, chart.project(pos + t * v0), h)

    dp, dm = div_along(h), div_along(-h)
    dp2, dm2 = div_along(h / 2.0), div_along(-h / 2.0)
    vdiv = (4.0 * (dp2 - dm2) / h - (dp - dm) / (2.0 * h)) / 3.0

    ric_vv = c * np.einsum("...q,...q->...", v0, v0)
    # 1-form Laplacian via the Weitzenboeck identity on the rough Laplacian
    neg_lap_bar_v = -lap + c * v0
    lap_term = 2.0 * np.einsum("...q,...q->...", neg_lap_bar_v, v0)

    phi_a = quad.integrate(2.0 * gradsq - vdiv - 2.0 * ric_vv)
    phi_b = quad.integrate(lie_sq + vdiv)
    phi_c = quad.integrate(2.0 * gradsq + div ** 2 - 2.0 * ric_vv)
    phi_d = quad.integrate(lap_term - vdiv - 4.0 * ric_vv)
    values = (phi_a, phi_b, phi_c, phi_d)
    if with_scale:
        return values, quad.integrate(2.0 * gradsq)
    return values


def conformal_dirichlet_value(chart, quad, v):
    """((4 - m)/m) * integral of (div v)^2: the closed form the Hessian
    takes on conformal fields, used as an independent oracle."""
    pos = chart.eval(quad.params)
    m = chart.param_dim
    h = 1e-3
    div = _divergence_at(chart, v, pos, h)
    return (4.0 - m) / m * quad.integrate(div ** 2)


# ---------------------------------------------------------------------------
# homogeneous-sphere summary table


def theorem91_table(n_range=range(2, 9), conformal_sign_tol=1e-6, seed=0):
    """Rows comparing three instability witnesses on unit spheres.

    For each n: the pointwise negative-definiteness verdict of the
    quartic stability form, the spectral criterion lambda_1 < 4Scal/(3m),
    and the sign of the Hessian on a conformal gradient field.  All three
    agree, flipping from stable to unstable at n = 5.  Product grids keep
    dimensions <= 5 cheap; higher spheres use stratified box sampling,
    whose error is far below the sign margin of the conformal value.
    """
    from .charts import build_quadrature, sphere_chart
    from .ssu import check_phi_ssu

    rows = []
    for n in n_range:
        chart = sphere_chart(n)
        if n <= 5:
            quad = build_quadrature(chart, [8] * (n - 1) + [16])
        else:
            quad = build_quadrature(chart, None, scheme="monte_carlo",
                                    seed=seed, n_samples=200_000)
        ssu_quad = build_quadrature(chart, [3] * (n - 1) + [6])
        ssu = check_phi_ssu(chart, ssu_quad).is_ssu
        spectral = phi_unstable_criterion(sphere_spectrum(n))
        v = conformal_gradient_field(chart, np.eye(n + 1)[0])
        values, scale = hessian_quadratic_form(chart, quad, v,
                                               with_scale=True)
        phi = float(np.mean(values))
        if phi < -conformal_sign_tol * scale:
            sign = -1
        elif phi > conformal_sign_tol * scale:
            sign = 1
        else:
            sign = 0
        rows.append({
            "n": n,
            "phi_ssu": bool(ssu),
            "spectral_criterion": bool(spectral),
            "conformal_value": phi,
            "conformal_sign": sign,
            "consistent": bool(ssu == spectral == (sign < 0)),
        })
    return rows

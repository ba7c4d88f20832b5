"""First, second, and averaged variations of the quartic energy.

Analytic formulas are evaluated by quadrature from frames and shape
operators; each has a finite-difference counterpart built from explicit
deformation paths (retraction paths for slopes, geodesic homotopies for
curvatures, coordinate flows for the averaged formulas).
"""

from dataclasses import dataclass

import numpy as np

from .charts import build_frames_batch, hypersurface_frames_at
from .errors import GeodesicIntegrationFailure, NotPhiHarmonic
from .flows import FlowedMapState, _coordinate_fields, flow_derivatives, integrate_flow
from .maps import AnalyticMap, phi_energy, phi_tension_nodes
from .ssu import q_operator_batch


@dataclass(frozen=True, eq=False)
class VariationSpec:
    """A variation field along a map.

    kind "ambient": tangential projection of a constant ambient vector on
    the target ("side" target) — the fields whose flows enter the averaged
    formulas.  kind "callback": fn(params, y) -> ambient vector, projected
    tangentially at y = u(params).
    """

    kind: str
    vector: np.ndarray | None = None
    fn: object = None
    description: str = ""

    def field_at(self, mp, params):
        y = mp.target.project(mp.position(params))
        if self.kind == "ambient":
            v = np.broadcast_to(self.vector, y.shape)
        elif self.kind == "callback":
            v = self.fn(params, y)
        else:
            raise ValueError(f"unknown variation kind {self.kind!r}")
        return mp.target.tangent_project_vector(y, v)


def ambient_variation(vector, description=""):
    return VariationSpec("ambient", vector=np.asarray(vector, dtype=float),
                         description=description or "ambient projection")


def callback_variation(fn, description="callback"):
    return VariationSpec("callback", fn=fn, description=description)


# ---------------------------------------------------------------------------
# first variation


def first_variation(mp, var):
    """Analytic slope: minus the pairing of the variation with the tension."""
    tau = phi_tension_nodes(mp)
    v = var.field_at(mp, mp.quad.params)
    return -mp.quad.integrate(np.sum(v * tau, axis=-1))


def _retracted_energy(mp, var, t):
    def u_t(params):
        return mp.target.project(mp.position(params)
                                 + t * var.field_at(mp, params))

    return phi_energy(AnalyticMap(mp.domain, mp.quad, mp.target, u_t))


def fd_first_variation(mp, var, h=1e-4):
    """Slope of the retraction path by Richardson-extrapolated differences."""
    d1 = (_retracted_energy(mp, var, h) - _retracted_energy(mp, var, -h)) / (2 * h)
    d2 = (_retracted_energy(mp, var, h / 2) - _retracted_energy(mp, var, -h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


# ---------------------------------------------------------------------------
# second variation


def _variation_derivatives(mp, var, h=1e-4):
    """nabla_{e_i} v at every node: (N, m, q), tangent to the target."""
    params = mp.quad.params
    _, _, W = mp.quad.light_frames
    y0 = mp.target.project(mp.position(params))
    outs = []
    for i in range(mp.m):
        r = W[..., :, i]
        f = lambda c: var.field_at(mp, params + c * r)
        d1 = (f(h) - f(-h)) / (2.0 * h)
        d2 = (f(h / 2.0) - f(-h / 2.0)) / h
        outs.append(mp.target.tangent_project_vector(y0, (4.0 * d2 - d1) / 3.0))
    return np.stack(outs, axis=1)


def second_variation(mp, var):
    """Curvature of the energy along a geodesic homotopy of the map.

    Sum of four quadrature terms: two pairing the covariant derivative of
    the variation with the differential, one weighting derivative inner
    products by the pullback Gram matrix, and the target-curvature term
    assembled from shape operators through the Gauss equation.
    """
    D = mp.node_frame_differential  # (N, q, m)
    U = mp.node_gram
    dV = _variation_derivatives(mp, var)  # (N, m, q)
    v = var.field_at(mp, mp.quad.params)

    dv_du = np.einsum("...iq,...qj->...ij", dV, D)  # <nabla_i v, du_j>
    I1 = np.sum(dv_du ** 2, axis=(-2, -1))
    I2 = np.einsum("...ij,...ji->...", dv_du, dv_du)
    dv_dv = np.einsum("...iq,...jq->...ij", dV, dV)
    I3 = np.einsum("...ij,...ij->...", U, dv_dv)

    # curvature term via the Gauss equation on the embedded target
    T, A = _target_curvature_data(mp)
    vc = np.einsum("...qn,...q->...n", T, v)
    Dc = np.einsum("...qn,...qm->...nm", T, D)
    Wc = np.einsum("...ij,...nj->...ni", U, Dc)  # coords of W_i
    Bvv = np.einsum("...vnk,...n,...k->...v", A, vc, vc)
    BvW = np.einsum("...vnk,...n,...ki->...vi", A, vc, Wc)
    Bvd = np.einsum("...vnk,...n,...ki->...vi", A, vc, Dc)
    BdW = np.einsum("...vnk,...ni,...ki->...vi", A, Dc, Wc)
    I4 = (np.einsum("...vi,...vi->...", BvW, Bvd)
          - np.einsum("...v,...vi->...", Bvv, BdW))
    return mp.quad.integrate(I1 + I2 + I3 + I4)


def _sphere_exp(y, v, t):
    nv = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(nv > 0, nv, 1.0)
    return np.cos(t * nv) * y + np.sin(t * nv) * v / safe


def geodesic_endpoint(target, y, v, t, nsteps=8):
    """exp_y(t v) on the embedded target.

    Spheres use the closed form; other charts integrate the geodesic
    equation (acceleration equals the second fundamental form of the
    velocity) by RK4 with velocity re-tangentialization.
    """
    if target.kind == "sphere":
        return _sphere_exp(y, v, t)

    codim1 = (target.ambient_dim - target.param_dim == 1
              and target.unit_normal(np.asarray(y, dtype=float)) is not None)

    def acc(yy, ww):
        yp = target.project(yy)
        if codim1:
            T, Nf, A = hypersurface_frames_at(target, yp)
        else:
            fb = build_frames_batch(target, target.params_of(yp))
            T, Nf, A = fb.tangent_frame, fb.normal_frame, fb.sff
        c = np.einsum("...qn,...q->...n", T, ww)
        coef = np.einsum("...vnk,...n,...k->...v", A, c, c)
        return np.einsum("...v,...qv->...q", coef, Nf)

    yy = np.array(y, copy=True)
    ww = np.array(v, copy=True)
    h = t / nsteps
    for _ in range(nsteps):
        k1y, k1w = ww, acc(yy, ww)
        k2y, k2w = ww + 0.5 * h * k1w, acc(yy + 0.5 * h * k1y, ww + 0.5 * h * k1w)
        k3y, k3w = ww + 0.5 * h * k2w, acc(yy + 0.5 * h * k2y, ww + 0.5 * h * k2w)
        k4y, k4w = ww + h * k3w, acc(yy + h * k3y, ww + h * k3w)
        yy = yy + (h / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y)
        ww = ww + (h / 6.0) * (k1w + 2 * k2w + 2 * k3w + k4w)
        ww = target.tangent_project_vector(target.project(yy), ww)
    if np.max(target.residual(yy)) > 1e-6 * (1.0 + abs(t)):
        raise GeodesicIntegrationFailure("geodesic left the target manifold")
    return target.project(yy)


def _geodesic_energy(mp, var, t):
    def u_t(params):
        y = mp.target.project(mp.position(params))
        return geodesic_endpoint(mp.target, y, var.field_at(mp, params), t)

    return phi_energy(AnalyticMap(mp.domain, mp.quad, mp.target, u_t))


def fd_second_variation(mp, var, h=1e-3):
    """5-point curvature of the geodesic-homotopy energy at t = 0."""
    Es = [_geodesic_energy(mp, var, t) for t in (-2 * h, -h)]
    Es.append(phi_energy(mp))
    Es += [_geodesic_energy(mp, var, t) for t in (h, 2 * h)]
    return (-Es[0] + 16 * Es[1] - 30 * Es[2] + 16 * Es[3] - Es[4]) / (12 * h * h)


# ---------------------------------------------------------------------------
# averaged formulas


def _target_curvature_data(mp):
    """Tangent frame and shape operators of the target at the image points."""
    tgt = mp.target
    y = tgt.project(mp.position(mp.quad.params))
    if tgt.ambient_dim - tgt.param_dim == 1 and tgt.unit_normal(y) is not None:
        T, _, A = hypersurface_frames_at(tgt, y)
        return T, A
    tb = build_frames_batch(tgt, tgt.params_of(y))
    return tb.tangent_frame, tb.sff


def average_second_variation_target(mp):
    """Sum over ambient coordinate flows on the target of the energy
    curvature, against its curvature-integral form.

    Returns (lhs, rhs): lhs sums finite-difference second derivatives of
    the flowed energies; rhs integrates tr(U D^T Q D) plus twice the
    squared Frobenius norms of D^T A_nu D, with D the frame coordinates
    of the differential on the target.
    """
    state = FlowedMapState(mp)
    lhs = sum(flow_derivatives(state, fld)[1]
              for fld in _coordinate_fields(mp.target))

    T, A = _target_curvature_data(mp)
    Q = q_operator_batch(A)
    D = mp.node_frame_differential
    U = mp.node_gram
    Dc = np.einsum("...qn,...qm->...nm", T, D)
    term1 = np.einsum("...ij,...ni,...nk,...kj->...", U, Dc, Q, Dc)
    DAD = np.einsum("...ni,...vnk,...kj->...vij", Dc, A, Dc)
    term2 = 2.0 * np.einsum("...vij,...vij->...", DAD, DAD)
    rhs = mp.quad.integrate(term1 + term2)
    return lhs, rhs


def harmonicity_residual(mp):
    tau = phi_tension_nodes(mp)
    return float(np.max(np.linalg.norm(tau, axis=-1)))


def average_second_variation_domain(mp, skip_harmonicity_check=False):
    """Domain version: flows act on the domain of a critical map.

    Requires the tension residual to vanish (the derivation integrates
    the first-variation term away).  rhs integrates tr(Q U^2) plus twice
    sum_alpha tr(A_alpha U A_alpha U) in the domain frame.
    """
    E = phi_energy(mp)
    if not skip_harmonicity_check:
        res = harmonicity_residual(mp)
        if res > 1e-5 * (1.0 + E):
            raise NotPhiHarmonic(
                f"tension residual {res:.3e} too large for the domain formula")

    dom = mp.domain
    fb = mp.quad.frames
    A = fb.sff  # (N, codim, m, m)
    Q = q_operator_batch(A)
    U = mp.node_gram
    term1 = np.einsum("...ij,...jk,...ki->...", Q, U, U)
    AU = np.einsum("...vij,...jk->...vik", A, U)
    term2 = 2.0 * np.einsum("...vij,...vji->...", AU, AU)
    rhs = mp.quad.integrate(term1 + term2)

    # lhs: energies of the map composed with domain flows, from a cached
    # parameter stencil of domain positions
    params = mp.quad.params
    m = mp.m
    h = 1e-5 * (1.0 + float(np.max(np.abs(params))))
    offsets = [np.zeros(m)]
    for a in range(m):
        for c in (h, -h, h / 2.0, -h / 2.0):
            e = np.zeros(m)
            e[a] = c
            offsets.append(e)
    stencil = params[:, None, :] + np.stack(offsets)[None, :, :]
    x0 = dom.eval(stencil)  # (N, 4m+1, q_dom)
    _, _, W = mp.quad.light_frames
    E0 = phi_energy(mp)

    def flowed_energy(fld, t):
        x = integrate_flow(fld, x0.reshape(-1, x0.shape[-1]), t)
        pos = mp.position(dom.params_of(x.reshape(x0.shape)))
        cols = []
        for a in range(m):
            b = 1 + 4 * a
            d1 = (pos[:, b] - pos[:, b + 1]) / (2.0 * h)
            d2 = (pos[:, b + 2] - pos[:, b + 3]) / h
            cols.append((4.0 * d2 - d1) / 3.0)
        Amb = np.stack(cols, axis=-1)
        D = np.einsum("...qa,...ai->...qi", Amb, W)
        UU = np.einsum("...qi,...qj->...ij", D, D)
        return mp.quad.integrate(0.25 * np.einsum("...ij,...ij->...", UU, UU))

    hh = 1e-3
    lhs = 0.0
    for fld in _coordinate_fields(dom):
        Es = [flowed_energy(fld, t) for t in (-2 * hh, -hh)]
        Es.append(E0)
        Es += [flowed_energy(fld, t) for t in (hh, 2 * hh)]
        lhs += (-Es[0] + 16 * Es[1] - 30 * Es[2] + 16 * Es[3] - Es[4]) / (12 * hh * hh)
    return lhs, rhs

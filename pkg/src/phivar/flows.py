"""Flows of projected ambient vector fields and energy-decay iterations.

The flow of v^T (tangential projection of a constant ambient vector v)
moves points toward v/|v| along the manifold.  Composing a map with such
flows never raises the quartic energy on average when the stability form
is negative definite; the decay iteration below exploits this to drive
the energy toward zero, choosing at each step the best coordinate flow.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import maps as maps_mod
from .charts import tangent_frames_batch
from .errors import (
    NoDescentDirection,
    ProjectionDivergence,
    StalledDecay,
    StepUnderflow,
)
from .ssu import check_phi_ssu, definiteness_tol, phi_form_batch


@dataclass(frozen=True, eq=False)
class FlowField:
    """Tangential projection of a constant ambient vector on a chart."""

    chart: object
    vector: np.ndarray
    side: str = "target"

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        v = np.broadcast_to(self.vector, y.shape)
        return self.chart.tangent_project_vector(y, v)


def integrate_flow(fld, start, t):
    """Flow points along y' = v^T(y) for time t: RK4 plus re-projection."""
    y = np.asarray(start, dtype=float).copy()
    if t == 0.0:
        return y
    nsteps = max(1, math.ceil(abs(t) / max(abs(t) / 64.0, 1e-3)))
    h = t / nsteps
    for _ in range(nsteps):
        k1 = fld.evaluate(y)
        k2 = fld.evaluate(y + 0.5 * h * k1)
        k3 = fld.evaluate(y + 0.5 * h * k2)
        k4 = fld.evaluate(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if np.max(fld.chart.residual(y)) > 1e-3 * (1.0 + abs(t)):
        raise ProjectionDivergence("flow left the manifold")
    return fld.chart.project(y)


# ---------------------------------------------------------------------------
# flowed-map representation


class FlowedMapState:
    """A map stored as target positions on a parameter-stencil cloud.

    Holds u evaluated at each quadrature node and at four axis offsets
    per parameter direction, so the ambient differential is available by
    Richardson central differences after any number of target-side flow
    compositions are applied to the cached positions directly.
    """

    FD_H = 1e-5

    def __init__(self, mp=None, _data=None):
        if _data is not None:
            self.quad, self.target, self.h, self.positions = _data
            return
        self.quad = mp.quad
        self.target = mp.target
        params = self.quad.params
        m = params.shape[-1]
        self.h = self.FD_H * (1.0 + float(np.max(np.abs(params))))
        offsets = [np.zeros(m)]
        for a in range(m):
            for c in (self.h, -self.h, self.h / 2.0, -self.h / 2.0):
                e = np.zeros(m)
                e[a] = c
                offsets.append(e)
        stencil = params[:, None, :] + np.stack(offsets)[None, :, :]
        # (N, 4m+1, q)
        self.positions = mp.position(stencil)

    def flowed(self, fld, t):
        pts = integrate_flow(fld, self.positions.reshape(-1, self.positions.shape[-1]), t)
        return FlowedMapState(_data=(self.quad, self.target, self.h,
                                     pts.reshape(self.positions.shape)))

    def node_positions(self):
        return self.positions[:, 0, :]

    def node_gram(self):
        pos = self.positions
        m = (pos.shape[1] - 1) // 4
        cols = []
        for a in range(m):
            b = 1 + 4 * a
            d1 = (pos[:, b] - pos[:, b + 1]) / (2.0 * self.h)
            d2 = (pos[:, b + 2] - pos[:, b + 3]) / self.h
            cols.append((4.0 * d2 - d1) / 3.0)
        A = np.stack(cols, axis=-1)  # (N, q, m) ambient partials
        _, _, W = self.quad.light_frames
        D = np.einsum("...qa,...ai->...qi", A, W)
        return np.einsum("...qi,...qj->...ij", D, D)

    def phi_energy(self):
        U = self.node_gram()
        return self.quad.integrate(0.25 * np.einsum("...ij,...ij->...", U, U))


def _coordinate_fields(target):
    q = target.ambient_dim
    return [FlowField(target, np.eye(q)[ell]) for ell in range(q)]


def _second_derivative(E, h):
    """5-point second derivative at 0 from [E(-2h),E(-h),E(0),E(h),E(2h)]."""
    return (-E[0] + 16.0 * E[1] - 30.0 * E[2] + 16.0 * E[3] - E[4]) / (12.0 * h * h)


def _first_derivative(E, h):
    """4th-order first derivative from the same 5-point stencil."""
    return (E[0] - 8.0 * E[1] + 8.0 * E[3] - E[4]) / (12.0 * h)


def flow_derivatives(state, fld, h=1e-3):
    """(d1, d2) of t -> E_phi(flow_t o u) at t = 0 by finite differences."""
    Es = [state.flowed(fld, t).phi_energy() for t in (-2 * h, -h)]
    Es.append(state.phi_energy())
    Es += [state.flowed(fld, t).phi_energy() for t in (h, 2 * h)]
    return _first_derivative(Es, h), _second_derivative(Es, h)


def select_descent_direction(mp_or_state, h=1e-3):
    """Best coordinate flow: (ell, sign, d1, d2) with the most negative d2
    and the sign making the first derivative non-positive."""
    state = (mp_or_state if isinstance(mp_or_state, FlowedMapState)
             else FlowedMapState(mp_or_state))
    E0 = state.phi_energy()
    tol = 1e-10 * (1.0 + E0)
    best = None
    for ell, fld in enumerate(_coordinate_fields(state.target)):
        d1, d2 = flow_derivatives(state, fld, h)
        if best is None or d2 < best[3]:
            sign = -1.0 if d1 > 0.0 else 1.0
            best = (ell, sign, sign * d1, d2)
    if best[3] >= -tol:
        raise NoDescentDirection(
            f"no flow direction with negative curvature (best d2={best[3]:.3e})")
    return best


@dataclass
class DecayTrace:
    """Record of one energy-decay run."""

    energies: list
    rho_estimates: list
    steps: list
    seed: int
    kappa: float = 0.0
    xi: float = 0.0

    @property
    def trailing_geometric_mean(self):
        tail = self.rho_estimates[len(self.rho_estimates) // 2:]
        if not tail:
            return 1.0
        return float(np.exp(np.mean(np.log(tail))))


def _estimate_xi(state, fields, kappa, spread=1.0, samples=9):
    """Bound on third t-derivatives of the flowed energy, sampled on a
    uniform grid in [-spread, spread] for every coordinate flow."""
    ts = np.linspace(-spread, spread, samples)
    dt = ts[1] - ts[0]
    m = state.quad.chart.param_dim
    E0 = state.phi_energy()
    xi = 3.0 * kappa / m
    for fld in fields:
        Es = np.array([state.flowed(fld, t).phi_energy() if t != 0.0 else E0
                       for t in ts])
        d3 = (Es[4:] - 2.0 * Es[3:-1] + 2.0 * Es[1:-3] - Es[:-4]) / (2.0 * dt ** 3)
        xi = max(xi, float(np.max(np.abs(d3))) / (m * max(E0, 1e-300)))
    return xi


def homotopy_decay(mp, max_iters=500, stop_energy=None, seed=0,
                   ssu_check_resolution=3):
    """Iteratively compose with best-coordinate flows to shrink the energy.

    The target must have a negative-definite stability form (checked on a
    coarse grid first).  The step starts at the decay-lemma value
    zeta = 3 kappa/(m xi) and backtracks by halving until the energy
    strictly decreases.
    """
    target = mp.target
    from .charts import build_quadrature

    n = target.param_dim
    res = [ssu_check_resolution] * (n - 1) + [2 * ssu_check_resolution]
    verdict = check_phi_ssu(target, build_quadrature(target, res))
    if not verdict.is_ssu:
        raise ValueError(
            "decay iteration requires a negative-definite stability form "
            f"on the target (worst value {verdict.worst_value:.3e})")

    state = FlowedMapState(mp)
    E = state.phi_energy()
    q = target.ambient_dim
    m = mp.m
    trace = DecayTrace([E], [], [], seed)
    if stop_energy is None:
        stop_energy = 1e-4 * E
    if E <= stop_energy or E < 1e-14:
        return trace

    # curvature scale from the worst stability-form eigenvalue at the
    # sampled image points, per the decay lemma's constant
    G = phi_form_batch(build_quadrature(target, res).frames.sff)
    kappa = -float(np.max(np.linalg.eigvalsh(G))) / q
    fields = _coordinate_fields(target)
    xi = _estimate_xi(state, fields, kappa)
    zeta0 = 3.0 * kappa / (m * xi)
    trace.kappa = kappa
    trace.xi = xi

    for _ in range(max_iters):
        try:
            ell, sign, d1, d2 = select_descent_direction(state)
        except NoDescentDirection as exc:
            raise StalledDecay(str(exc)) from exc
        fld = fields[ell]
        zeta = zeta0
        for _ in range(60):
            new_state = state.flowed(fld, sign * zeta)
            E_new = new_state.phi_energy()
            if E_new < E:
                break
            zeta *= 0.5
        else:
            raise StalledDecay("line search exhausted without decrease")
        # extend while the step keeps paying off
        for _ in range(10):
            cand = state.flowed(fld, sign * 2.0 * zeta)
            E_cand = cand.phi_energy()
            if E_cand >= E_new:
                break
            zeta *= 2.0
            new_state, E_new = cand, E_cand
        state = new_state
        trace.rho_estimates.append(E_new / E)
        trace.steps.append((ell, sign, zeta))
        E = E_new
        trace.energies.append(E)
        if E <= stop_energy:
            break
    return trace


# ---------------------------------------------------------------------------
# composition law and discrete descent


def compose_energy(map_u, map_psi):
    """Energy of u composed with a domain self-map, two ways.

    Returns (direct, via_product): the direct quadrature of the composed
    differential, and the per-node trace identity
    e_phi(u o psi) = 1/4 tr((U Psi)(U Psi)^T) built from the Gram matrix
    U of u at psi(x) and the Gram matrix Psi of psi at x (valid in the
    frames adapted to psi, e.g. one-dimensional domains or psi = Id).
    """
    dom = map_psi.domain
    quad = map_psi.quad
    if map_u.domain is not map_psi.target:
        raise ValueError("need psi: M -> M and u defined on M")

    def composed(params):
        return map_u.position(dom.params_of(map_psi.position(params)))

    comp = maps_mod.AnalyticMap(dom, quad, map_u.target, composed,
                                name="composition")
    direct = maps_mod.phi_energy(comp)

    # product identity per node
    psi_pos = map_psi.node_positions()
    psi_params = dom.params_of(psi_pos)
    _, _, W_at = tangent_frames_batch(dom, psi_params)
    A_u = map_u.ambient_differential(psi_params)
    D_u = np.einsum("...qa,...ai->...qi", A_u, W_at)
    U = np.einsum("...qi,...qj->...ij", D_u, D_u)
    Psi = map_psi.node_gram
    UP = np.einsum("...ij,...jk->...ik", U, Psi)
    dens = 0.25 * np.einsum("...ij,...ij->...", UP, UP)
    return direct, quad.integrate(dens)


def discrete_phi_descent(grid_map, step=0.05, iters=200, residual_stop=1e-6):
    """Projected gradient descent on the node positions of a grid map.

    The discrete energy gradient is minus the quadrature-weighted tension
    field; steps are retracted onto the target and backtracked so the
    energy never increases.  Returns (final map, tension-residual trace).
    """
    mp = grid_map
    E = maps_mod.phi_energy(mp)
    trace = []
    for _ in range(iters):
        tau = maps_mod.phi_tension_nodes(mp)
        res = float(np.max(np.linalg.norm(tau, axis=-1)))
        trace.append(res)
        if res < residual_stop:
            break
        while True:
            if step < 1e-16:
                raise StepUnderflow("descent step underflow")
            cand = mp.with_points(mp.points + step * tau)
            E_new = maps_mod.phi_energy(cand)
            if E_new <= E + 1e-15 * (1.0 + abs(E)):
                break
            step *= 0.5
        mp, E = cand, E_new
        step *= 1.2
    return mp, trace

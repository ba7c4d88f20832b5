"""Maps between embedded manifolds: energies and the tension field.

A map handle pairs a domain chart with a quadrature set and a target
chart.  Analytic handles carry callbacks for the map and (optionally) its
differential; grid handles carry one target point per quadrature node on
a periodic parameter grid and differentiate by central differences.

The quartic energy density of a map u is

    e_phi(u) = 1/4 sum_{i,j} <du(e_i), du(e_j)>^2

over an orthonormal domain frame {e_i}; its Euler-Lagrange residual is
the tension field tau_phi(u) = sum_i nabla^u_{e_i}(sum_j U_ij du(e_j)).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .charts import (build_quadrature, chart_from_config, grid_shape,
                     sphere_chart, tangent_frames_batch)
from .errors import ConfigError, RepresentationUnsupported


def _fd_step(params):
    return 1e-5 * (1.0 + np.max(np.abs(params)))


class SmoothMapHandle:
    """Base class; subclasses implement position/ambient_differential."""

    def __init__(self, domain, quad, target, name="map"):
        if quad.chart is not domain:
            raise ValueError("quadrature must be built on the domain chart")
        self.domain = domain
        self.quad = quad
        self.target = target
        self.name = name

    @property
    def m(self):
        return self.domain.param_dim

    @property
    def n(self):
        return self.target.param_dim

    @property
    def q(self):
        return self.target.ambient_dim

    def position(self, params):
        raise NotImplementedError

    def ambient_differential(self, params):
        """Ambient partials of the map w.r.t. domain parameters, (...,q,m)."""
        raise NotImplementedError

    def node_positions(self):
        return self.position(self.quad.params)

    def node_differential(self):
        return self.ambient_differential(self.quad.params)

    @cached_property
    def node_frame_differential(self):
        """D with columns du(e_i) against the domain frame, (N, q, m)."""
        _, _, W = self.quad.light_frames
        return np.einsum("...qa,...am->...qm", self.node_differential(), W)

    @cached_property
    def node_gram(self):
        D = self.node_frame_differential
        return np.einsum("...qi,...qj->...ij", D, D)


class AnalyticMap(SmoothMapHandle):
    """Map given by a callback u(params)->ambient, differential optional."""

    def __init__(self, domain, quad, target, u_fn, du_fn=None, name="map"):
        super().__init__(domain, quad, target, name)
        self._u = u_fn
        self._du = du_fn

    def position(self, params):
        return self._u(np.asarray(params, dtype=float))

    def ambient_differential(self, params):
        params = np.asarray(params, dtype=float)
        if self._du is not None:
            return self._du(params)
        h = _fd_step(params)
        out = None
        for hh, wgt in ((h, -1.0 / 3.0), (h / 2.0, 4.0 / 3.0)):
            cols = []
            for a in range(params.shape[-1]):
                dp = np.zeros_like(params)
                dp[..., a] = hh
                cols.append((self._u(params + dp) - self._u(params - dp))
                            / (2.0 * hh))
            d = np.stack(cols, axis=-1)
            out = wgt * d if out is None else out + wgt * d
        return out


class GridMap(SmoothMapHandle):
    """One target point per node of a fully periodic product quadrature."""

    def __init__(self, domain, quad, target, points, name="grid map"):
        super().__init__(domain, quad, target, name)
        if not all(domain.periodic):
            raise RepresentationUnsupported(
                "grid maps need a fully periodic domain")
        self.shape = grid_shape(quad)
        points = np.asarray(points, dtype=float)
        if points.shape != (len(quad), target.ambient_dim):
            raise ValueError("need one target point per quadrature node")
        self.points = target.project(points)
        self.steps = [(hi - lo) / c for (lo, hi), c in
                      zip(domain.domain_box, self.shape)]

    def with_points(self, points):
        return GridMap(self.domain, self.quad, self.target, points, self.name)

    def position(self, params=None):
        if params is not None and params is not self.quad.params:
            raise RepresentationUnsupported(
                "grid maps are defined only at their quadrature nodes")
        return self.points

    def ambient_differential(self, params=None):
        if params is not None and params is not self.quad.params:
            raise RepresentationUnsupported(
                "grid maps are defined only at their quadrature nodes")
        grid = self.points.reshape(self.shape + (self.q,))
        cols = []
        for a, h in enumerate(self.steps):
            d = (np.roll(grid, -1, axis=a) - np.roll(grid, 1, axis=a)) / (2 * h)
            cols.append(d.reshape(len(self.quad), self.q))
        return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# densities and energies


@dataclass(frozen=True, eq=False)
class PullbackGram:
    """Gram matrix U_ij = <du(e_i), du(e_j)> at one node."""

    matrix: np.ndarray


def pullback_gram(mp, node):
    return PullbackGram(mp.node_gram[node].copy())


def phi_energy_density(U):
    """Quartic density 1/4 sum U_ij^2 (equals 1/4 sum of squared
    eigenvalues of U)."""
    U = U.matrix if isinstance(U, PullbackGram) else np.asarray(U)
    return float(0.25 * np.sum(U * U))


def energy_densities(U, p):
    """Classical density e = tr(U)/2 and p-density (1/p) tr(U)^{p/2}."""
    U = U.matrix if isinstance(U, PullbackGram) else np.asarray(U)
    t = float(np.trace(U))
    return 0.5 * t, (1.0 / p) * t ** (p / 2.0)


def phi_energy(mp):
    """Quadrature value of the quartic energy of a map."""
    U = mp.node_gram
    dens = 0.25 * np.einsum("...ij,...ij->...", U, U)
    return mp.quad.integrate(dens)


def energy(mp):
    return mp.quad.integrate(0.5 * np.trace(mp.node_gram, axis1=-2, axis2=-1))


def p_energy(mp, p):
    tr = np.trace(mp.node_gram, axis1=-2, axis2=-1)
    return mp.quad.integrate((1.0 / p) * tr ** (p / 2.0))


# ---------------------------------------------------------------------------
# tension field


def _w_fields(mp, params):
    """W_i = sum_j U_ij du(e_j) and the frame field at params.

    Returns (Wf, E): Wf is (N, m, q) with rows W_i, E is (N, q, m) with
    columns e_i of the domain frame field.
    """
    _, E, W = tangent_frames_batch(mp.domain, params)
    A = mp.ambient_differential(params)
    D = np.einsum("...qa,...ai->...qi", A, W)
    U = np.einsum("...qi,...qj->...ij", D, D)
    return np.einsum("...ij,...qj->...iq", U, D), E


def _target_projectors(mp, positions):
    y = mp.target.project(positions)
    return mp.target.tangent_projector(y)


def phi_tension_nodes(mp, h=1e-4):
    """Tension field at every quadrature node, (N, q), tangent to target.

    Analytic maps: for each frame direction e_i the field
    W_i(x) = sum_j U_ij(x) du_x(e_j(x)) is differentiated along e_i by
    Richardson-extrapolated central differences in parameter space, then
    projected onto the target tangent space (flat ambient connection).
    Grid maps: periodic central differences of the same node fields; valid
    because periodic charts here are unit-speed, so axes are the frame.
    """
    if isinstance(mp, GridMap):
        D = mp.node_frame_differential
        U = mp.node_gram
        Wf = np.einsum("...ij,...qj->...iq", U, D)  # (N, m, q)
        grid = Wf.reshape(mp.shape + (mp.m, mp.q))
        tau = np.zeros((len(mp.quad), mp.q))
        for a, hh in enumerate(mp.steps):
            d = (np.roll(grid, -1, axis=a) - np.roll(grid, 1, axis=a)) / (2 * hh)
            tau += d.reshape(len(mp.quad), mp.m, mp.q)[:, a, :]
        P = _target_projectors(mp, mp.points)
        return np.einsum("...ij,...j->...i", P, tau)

    params = mp.quad.params
    _, E0, W = mp.quad.light_frames
    Wf0, _ = _w_fields(mp, params)
    tau = np.zeros((len(mp.quad), mp.q))
    for i in range(mp.m):
        r = W[..., :, i]

        def fields(c):
            Wf, E = _w_fields(mp, params + c * r)
            return Wf[:, i, :], E[..., :, i]

        wp, ep = fields(h)
        wm, em = fields(-h)
        wp2, ep2 = fields(h / 2.0)
        wm2, em2 = fields(-h / 2.0)
        dW = (4.0 * (wp2 - wm2) / h - (wp - wm) / (2.0 * h)) / 3.0
        dE = (4.0 * (ep2 - em2) / h - (ep - em) / (2.0 * h)) / 3.0
        # connection correction: the frame is not parallel, so subtract
        # W(nabla_{e_i} e_i) with tangential coefficients of d(e_i)/de_i
        gamma = np.einsum("...q,...qk->...k", dE, E0)
        tau += dW - np.einsum("...k,...kq->...q", gamma, Wf0)
    P = _target_projectors(mp, mp.node_positions())
    return np.einsum("...ij,...j->...i", P, tau)


def phi_tension(mp, node=None):
    """Tension field; one node if given, else all nodes."""
    tau = phi_tension_nodes(mp)
    return tau if node is None else tau[node]


def tension_sup_norm(mp):
    return float(np.max(np.linalg.norm(phi_tension_nodes(mp), axis=-1)))


# ---------------------------------------------------------------------------
# built-in maps


def identity_map(chart, quad):
    return AnalyticMap(chart, quad, chart, chart.eval, chart.jacobian,
                       name="identity")


def constant_map(domain, quad, target, point):
    point = np.asarray(point, dtype=float)

    def u(params):
        return np.broadcast_to(point, params.shape[:-1] + point.shape).copy()

    def du(params):
        return np.zeros(params.shape[:-1] + (point.size, params.shape[-1]))

    return AnalyticMap(domain, quad, target, u, du, name="constant")


def circle_power_map(domain, quad, target, k):
    """Degree-k self-map of the circle, u(theta) = k theta."""

    def u(th):
        a = k * th[..., 0]
        return np.stack([np.cos(a), np.sin(a)], axis=-1)

    def du(th):
        a = k * th[..., 0]
        return np.stack([-k * np.sin(a), k * np.cos(a)], axis=-1)[..., None]

    return AnalyticMap(domain, quad, target, u, du, name=f"circle power {k}")


def latitude_circle_map(domain, quad, target, colatitude):
    """Circle into a sphere along the latitude at the given colatitude."""
    q = target.ambient_dim
    c0, s0 = np.cos(colatitude), np.sin(colatitude)

    def u(th):
        a = th[..., 0]
        out = np.zeros(th.shape[:-1] + (q,))
        out[..., 0] = c0
        out[..., 1] = s0 * np.cos(a)
        out[..., 2] = s0 * np.sin(a)
        return out

    def du(th):
        a = th[..., 0]
        out = np.zeros(th.shape[:-1] + (q, 1))
        out[..., 1, 0] = -s0 * np.sin(a)
        out[..., 2, 0] = s0 * np.cos(a)
        return out

    return AnalyticMap(domain, quad, target, u, du,
                       name=f"latitude {colatitude:g}")


def equator_map(domain, quad, target):
    """Great-circle (equatorial) embedding of the circle into a sphere."""
    return latitude_circle_map(domain, quad, target, np.pi / 2.0)


def map_from_config(cfg):
    """Build a map from a JSON-style dict.

    Schema: {"kind": ..., "grid": per-axis resolutions, plus kind-specific
    keys}.  Kinds: "identity" (chart), "constant" (domain, target, point),
    "circle_power" (k, optional target), "latitude" (colatitude, target),
    "equator" (target), "warped_circle" (optional amplitude).  Circle-domain
    kinds default the domain to the unit circle and "grid" to [160].
    """
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("map config must be an object with a 'kind' key")
    kind = cfg["kind"]
    allowed = {
        "identity": {"kind", "chart", "grid"},
        "constant": {"kind", "domain", "target", "point", "grid"},
        "circle_power": {"kind", "k", "target", "grid"},
        "latitude": {"kind", "colatitude", "target", "grid"},
        "equator": {"kind", "target", "grid"},
        "warped_circle": {"kind", "amplitude", "grid"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown map kind {kind!r}")
    extra = set(cfg) - allowed[kind]
    if extra:
        raise ConfigError(f"unknown map keys {sorted(extra)}")

    if kind == "identity":
        chart = chart_from_config(cfg.get("chart", {"kind": "sphere", "dim": 2}))
        quad = build_quadrature(chart, cfg.get("grid", 8))
        return identity_map(chart, quad)

    circ = sphere_chart(1)
    quad = build_quadrature(circ, cfg.get("grid", [160]))
    if kind == "constant":
        domain = (chart_from_config(cfg["domain"]) if "domain" in cfg else circ)
        if domain is not circ:
            quad = build_quadrature(domain, cfg.get("grid", 8))
        target = chart_from_config(cfg["target"])
        return constant_map(domain, quad, target, cfg["point"])
    if kind == "circle_power":
        target = (chart_from_config(cfg["target"]) if "target" in cfg else circ)
        return circle_power_map(circ, quad, target, int(cfg.get("k", 2)))
    if kind == "latitude":
        target = chart_from_config(cfg["target"])
        return latitude_circle_map(circ, quad, target, float(cfg["colatitude"]))
    if kind == "equator":
        target = chart_from_config(cfg["target"])
        return equator_map(circ, quad, target)
    return warped_circle_map(circ, quad, circ,
                             float(cfg.get("amplitude", 0.3)))


def warped_circle_map(domain, quad, target, amplitude=0.3):
    """Non-geodesic circle self-map u(theta) = theta + amplitude sin(theta)."""

    def u(th):
        a = th[..., 0] + amplitude * np.sin(th[..., 0])
        return np.stack([np.cos(a), np.sin(a)], axis=-1)

    def du(th):
        a = th[..., 0] + amplitude * np.sin(th[..., 0])
        da = 1.0 + amplitude * np.cos(th[..., 0])
        return (da[..., None] * np.stack([-np.sin(a), np.cos(a)],
                                         axis=-1))[..., None]

    return AnalyticMap(domain, quad, target, u, du, name="warped circle")

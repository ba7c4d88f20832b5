"""Embedded-manifold charts, orthonormal frames, and quadrature.

A chart immerses a parameter box into Euclidean space.  From its jacobian
and hessian we build orthonormal tangent/normal frames and the second
fundamental form, which feed every curvature formula in the package.

Array conventions (batched over arbitrary leading axes):
    params   (..., n)        parameter points
    position (..., q)        ambient points
    jacobian (..., q, n)     ambient partials, one column per parameter
    hessian  (..., q, n, n)  ambient second partials, symmetric in (a, b)
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    ConfigError,
    DegenerateFrame,
    NotHypersurface,
    ProjectionDivergence,
)

RANK_TOL = 1e-8


# ---------------------------------------------------------------------------
# finite differences


def _fd_step(params):
    return 1e-5 * (1.0 + np.max(np.abs(params)))


def _central(f, params, h):
    """Central-difference partials of f along each parameter axis.

    Returns an array of shape f(params).shape + (n,).
    """
    n = params.shape[-1]
    cols = []
    for a in range(n):
        dp = np.zeros_like(params)
        dp[..., a] = h
        cols.append((f(params + dp) - f(params - dp)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def _richardson_diff(f, params, h):
    """Central differences with one Richardson extrapolation level."""
    d1 = _central(f, params, h)
    d2 = _central(f, params, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


class ImmersionChart:
    """Immersion of a parameter box into R^q.

    Parameters
    ----------
    param_dim : int
        Intrinsic dimension n >= 1.
    ambient_dim : int
        Ambient dimension q > n.
    eval_fn : callable
        params (..., n) -> ambient points (..., q).
    domain_box : list of (lo, hi)
        Closed parameter intervals, one per axis.
    periodic : list of bool
        Periodicity flag per axis.
    kind : str
        One of "sphere", "ellipsoid", "paraboloid", "torus", "custom".
    jacobian_fn, hessian_fn : callable, optional
        Analytic derivatives; finite-difference fallbacks are used when
        absent (central differences, one Richardson level).
    """

    def __init__(self, param_dim, ambient_dim, eval_fn, domain_box, periodic,
                 kind="custom", jacobian_fn=None, hessian_fn=None,
                 unit_normal_fn=None, residual_fn=None, projector_fn=None,
                 project_fn=None, params_of_fn=None, meta=None):
        if param_dim < 1 or ambient_dim <= param_dim:
            raise ConfigError("need ambient_dim > param_dim >= 1")
        self.param_dim = param_dim
        self.ambient_dim = ambient_dim
        self._eval = eval_fn
        self.domain_box = [tuple(map(float, iv)) for iv in domain_box]
        self.periodic = list(periodic)
        self.kind = kind
        self._jacobian = jacobian_fn
        self._hessian = hessian_fn
        self._unit_normal = unit_normal_fn
        self._residual = residual_fn
        self._projector = projector_fn
        self._project = project_fn
        self._params_of = params_of_fn
        self.meta = dict(meta or {})

    # -- evaluation and derivatives -------------------------------------

    def eval(self, params):
        return self._eval(np.asarray(params, dtype=float))

    def jacobian(self, params):
        params = np.asarray(params, dtype=float)
        if self._jacobian is not None:
            return self._jacobian(params)
        return _richardson_diff(self._eval, params, _fd_step(params))

    def hessian(self, params):
        params = np.asarray(params, dtype=float)
        if self._hessian is not None:
            return self._hessian(params)
        h = _fd_step(params)
        if self._jacobian is not None:
            H = _richardson_diff(self._jacobian, params, h)
        else:
            jac = lambda p: _richardson_diff(self._eval, p, _fd_step(p))
            H = _richardson_diff(jac, params, 100.0 * h)
        return 0.5 * (H + np.swapaxes(H, -1, -2))

    # -- ambient-side geometry -------------------------------------------

    def residual(self, y):
        """Absolute defining-equation residual (0 means on the manifold)."""
        if self._residual is None:
            raise RepresentationUnsupportedError(self.kind)
        return self._residual(np.asarray(y, dtype=float))

    def has_closed_surface_ops(self):
        return self._projector is not None

    def tangent_projector(self, y):
        """Orthogonal projector onto the tangent space at an on-manifold y."""
        y = np.asarray(y, dtype=float)
        if self._projector is not None:
            return self._projector(y)
        raise RepresentationUnsupportedError(self.kind)

    def tangent_project_vector(self, y, v):
        """Tangential component of ambient vectors v at on-manifold y."""
        y = np.asarray(y, dtype=float)
        v = np.asarray(v, dtype=float)
        if self._unit_normal is not None and self.ambient_dim - self.param_dim == 1:
            nrm = self._unit_normal(y)
            return v - np.sum(v * nrm, axis=-1, keepdims=True) * nrm
        P = self.tangent_projector(y)
        return np.einsum("...ij,...j->...i", P, v)

    def project(self, y):
        """Closest-point projection onto the manifold."""
        y = np.asarray(y, dtype=float)
        if self._project is not None:
            return self._project(y)
        raise RepresentationUnsupportedError(self.kind)

    def params_of(self, y):
        """Invert the chart on (a neighbourhood of) its image."""
        y = np.asarray(y, dtype=float)
        if self._params_of is not None:
            return self._params_of(y)
        raise RepresentationUnsupportedError(self.kind)

    def unit_normal(self, y):
        if self._unit_normal is None:
            return None
        return self._unit_normal(np.asarray(y, dtype=float))

    def random_params(self, rng, size):
        """Uniform interior parameter samples, degenerate loci avoided."""
        lo = np.array([iv[0] for iv in self.domain_box])
        hi = np.array([iv[1] for iv in self.domain_box])
        margin = 0.05 * (hi - lo) * (~np.asarray(self.periodic)).astype(float)
        return rng.uniform(lo + margin, hi - margin, size=(size, self.param_dim))


def RepresentationUnsupportedError(kind):
    from .errors import RepresentationUnsupported

    return RepresentationUnsupported(
        "operation needs a built-in chart with closed-form surface data, "
        f"got kind={kind!r}"
    )


# ---------------------------------------------------------------------------
# built-in charts


def _sphere_eval(th):
    s = np.sin(th)
    c = np.cos(th)
    n = th.shape[-1]
    cols = []
    prod = np.ones(th.shape[:-1])
    for k in range(n):
        cols.append(prod * c[..., k])
        prod = prod * s[..., k]
    cols.append(prod)
    return np.stack(cols, axis=-1)


def _sphere_jacobian(th):
    s = np.sin(th)
    c = np.cos(th)
    n = th.shape[-1]
    J = np.zeros(th.shape[:-1] + (n + 1, n))

    def sprod(idx):
        if not idx:
            return np.ones(th.shape[:-1])
        return np.prod(s[..., idx], axis=-1)

    for k in range(n):
        for a in range(k):
            idx = [i for i in range(k) if i != a]
            J[..., k, a] = sprod(idx) * c[..., a] * c[..., k]
        J[..., k, k] = -sprod(list(range(k))) * s[..., k]
    for a in range(n):
        idx = [i for i in range(n) if i != a]
        J[..., n, a] = sprod(idx) * c[..., a]
    return J


def _sphere_params_of(y):
    q = y.shape[-1]
    n = q - 1
    th = np.zeros(y.shape[:-1] + (n,))
    for k in range(n - 1):
        tail = np.sqrt(np.sum(y[..., k + 1:] ** 2, axis=-1))
        th[..., k] = np.arctan2(tail, y[..., k])
    th[..., n - 1] = np.mod(np.arctan2(y[..., n], y[..., n - 1]), 2.0 * np.pi)
    return th


def sphere_chart(n):
    """Unit sphere of dimension n in R^{n+1}, angle parametrization."""
    box = [(0.0, np.pi)] * (n - 1) + [(0.0, 2.0 * np.pi)]
    periodic = [False] * (n - 1) + [True]

    def hessian(th):
        return _richardson_diff(_sphere_jacobian, th, _fd_step(th))

    def projector(y):
        q = y.shape[-1]
        return np.eye(q) - y[..., :, None] * y[..., None, :]

    return ImmersionChart(
        n, n + 1, _sphere_eval, box, periodic, kind="sphere",
        jacobian_fn=_sphere_jacobian, hessian_fn=hessian,
        unit_normal_fn=lambda y: -y,
        residual_fn=lambda y: np.abs(np.sqrt(np.sum(y ** 2, axis=-1)) - 1.0),
        projector_fn=projector,
        project_fn=lambda y: y / np.linalg.norm(y, axis=-1, keepdims=True),
        params_of_fn=_sphere_params_of,
        meta={"dim": n},
    )


def ellipsoid_chart(axes):
    """Ellipsoid sum(y_i^2/a_i^2)=1 in R^q as a scaled sphere chart."""
    a = np.asarray(axes, dtype=float)
    if np.any(a <= 0):
        raise ConfigError("ellipsoid axes must be positive")
    q = a.size
    n = q - 1
    base = sphere_chart(n)

    def evalf(th):
        return a * _sphere_eval(th)

    def jac(th):
        return a[:, None] * _sphere_jacobian(th)

    def hess(th):
        return a[:, None, None] * base.hessian(th)

    def residual(y):
        return np.abs(np.sum((y / a) ** 2, axis=-1) - 1.0)

    def normal(y):
        g = y / a ** 2
        return -g / np.linalg.norm(g, axis=-1, keepdims=True)

    def projector(y):
        nrm = -normal(y)
        return np.eye(q) - nrm[..., :, None] * nrm[..., None, :]

    def project(y):
        # closest point: y_i = z_i/(1 + lam/a_i^2), Newton on lam
        z = np.asarray(y, dtype=float)
        lam = np.zeros(z.shape[:-1])
        for _ in range(100):
            d = 1.0 + lam[..., None] / a ** 2
            x = z / d
            g = np.sum((x / a) ** 2, axis=-1) - 1.0
            if np.max(np.abs(g)) < 1e-14:
                break
            dg = np.sum(-2.0 * x ** 2 / (a ** 4 * d), axis=-1)
            lam = lam - g / dg
        else:
            raise ProjectionDivergence("ellipsoid projection stalled")
        return z / (1.0 + lam[..., None] / a ** 2)

    return ImmersionChart(
        n, q, evalf, base.domain_box, base.periodic, kind="ellipsoid",
        jacobian_fn=jac, hessian_fn=hess, unit_normal_fn=normal,
        residual_fn=residual, projector_fn=projector, project_fn=project,
        params_of_fn=lambda y: _sphere_params_of(y / a),
        meta={"axes": a.copy()},
    )


def paraboloid_chart(n, half_width=3.0):
    """Graph y = (x, |x|^2) over the box |x_i| <= half_width."""
    box = [(-half_width, half_width)] * n
    periodic = [False] * n

    def evalf(x):
        return np.concatenate([x, np.sum(x ** 2, axis=-1, keepdims=True)], axis=-1)

    def jac(x):
        J = np.zeros(x.shape[:-1] + (n + 1, n))
        J[..., :n, :] = np.eye(n)
        J[..., n, :] = 2.0 * x
        return J

    def hess(x):
        H = np.zeros(x.shape[:-1] + (n + 1, n, n))
        H[..., n, :, :] = 2.0 * np.eye(n)
        return H

    def residual(y):
        return np.abs(y[..., n] - np.sum(y[..., :n] ** 2, axis=-1))

    def normal(y):
        x = y[..., :n]
        v = np.concatenate([-2.0 * x, np.ones(x.shape[:-1] + (1,))], axis=-1)
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def projector(y):
        nrm = normal(y)
        return np.eye(n + 1) - nrm[..., :, None] * nrm[..., None, :]

    def project(y):
        xt = y[..., :n]
        zt = y[..., n]
        x = xt.copy()
        for _ in range(100):
            r2 = np.sum(x ** 2, axis=-1)
            g = (x - xt) + 2.0 * (r2 - zt)[..., None] * x
            if np.max(np.abs(g)) < 1e-13:
                break
            c = 1.0 + 2.0 * (r2 - zt)
            Jn = c[..., None, None] * np.eye(n) + 4.0 * x[..., :, None] * x[..., None, :]
            x = x - np.linalg.solve(Jn, g[..., None])[..., 0]
        else:
            raise ProjectionDivergence("paraboloid projection stalled")
        return evalf(x)

    return ImmersionChart(
        n, n + 1, evalf, box, periodic, kind="paraboloid",
        jacobian_fn=jac, hessian_fn=hess, unit_normal_fn=normal,
        residual_fn=residual, projector_fn=projector, project_fn=project,
        params_of_fn=lambda y: y[..., :n].copy(),
        meta={"dim": n, "half_width": half_width},
    )


def torus_chart(m):
    """Flat m-torus [0,2pi)^m embedded as the slice y_{m+1}=0 of R^{m+1}."""
    box = [(0.0, 2.0 * np.pi)] * m
    periodic = [True] * m

    def evalf(th):
        return np.concatenate([th, np.zeros(th.shape[:-1] + (1,))], axis=-1)

    def jac(th):
        J = np.zeros(th.shape[:-1] + (m + 1, m))
        J[..., :m, :] = np.eye(m)
        return J

    def hess(th):
        return np.zeros(th.shape[:-1] + (m + 1, m, m))

    P = np.diag(np.concatenate([np.ones(m), [0.0]]))

    def project(y):
        out = y.copy()
        out[..., m] = 0.0
        return out

    def normal(y):
        e = np.zeros(y.shape[:-1] + (m + 1,))
        e[..., m] = 1.0
        return e

    return ImmersionChart(
        m, m + 1, evalf, box, periodic, kind="torus",
        jacobian_fn=jac, hessian_fn=hess, unit_normal_fn=normal,
        residual_fn=lambda y: np.abs(y[..., m]),
        projector_fn=lambda y: np.broadcast_to(P, y.shape[:-1] + (m + 1, m + 1)),
        project_fn=project,
        params_of_fn=lambda y: np.mod(y[..., :m], 2.0 * np.pi),
        meta={"dim": m},
    )


def chart_from_config(cfg):
    """Build a chart from a JSON-style dict, e.g. {"kind":"sphere","dim":5}."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("chart config must be an object with a 'kind' key")
    kind = cfg["kind"]
    allowed = {
        "sphere": {"kind", "dim"},
        "ellipsoid": {"kind", "axes"},
        "paraboloid": {"kind", "dim"},
        "torus": {"kind", "dim"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown chart kind {kind!r}")
    extra = set(cfg) - allowed[kind]
    if extra:
        raise ConfigError(f"unknown chart keys {sorted(extra)}")
    try:
        if kind == "sphere":
            return sphere_chart(int(cfg["dim"]))
        if kind == "ellipsoid":
            return ellipsoid_chart([float(x) for x in cfg["axes"]])
        if kind == "paraboloid":
            return paraboloid_chart(int(cfg["dim"]))
        return torus_chart(int(cfg["dim"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad chart config: {exc}") from exc


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True, eq=False)
class FramedPoint:
    """A sample of an immersed manifold with orthonormal frames.

    Attributes
    ----------
    params : (n,)      parameter coordinates
    position : (q,)    ambient point
    tangent_frame : (q, n)   orthonormal tangent vectors, columns
    normal_frame : (q, q-n)  orthonormal normal vectors, columns
    sff : (q-n, n, n)  shape operators A_nu in the tangent frame
    mean_curvature : (q,)    sum of B(e_b, e_b), an ambient normal vector
    frame_coords : (n, n)    W with jacobian @ W = tangent_frame
    """

    params: np.ndarray
    position: np.ndarray
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    sff: np.ndarray
    mean_curvature: np.ndarray
    frame_coords: np.ndarray


@dataclass(frozen=True, eq=False)
class FrameBatch:
    """Vectorized frames at N points; same fields as FramedPoint, batched."""

    params: np.ndarray
    position: np.ndarray
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    sff: np.ndarray
    mean_curvature: np.ndarray
    frame_coords: np.ndarray

    def __len__(self):
        return self.params.shape[0]

    def point(self, i):
        return FramedPoint(
            self.params[i], self.position[i], self.tangent_frame[i],
            self.normal_frame[i], self.sff[i], self.mean_curvature[i],
            self.frame_coords[i])


def _mgs(J):
    """Batched modified Gram-Schmidt.  Returns (E, R) with J = E R."""
    n = J.shape[-1]
    sv = np.linalg.svd(J, compute_uv=False)
    if np.any(sv[..., -1] <= RANK_TOL * sv[..., 0]):
        raise DegenerateFrame("jacobian rank deficient at a sampled point")
    E = np.array(J, dtype=float, copy=True)
    R = np.zeros(J.shape[:-2] + (n, n))
    for i in range(n):
        v = np.array(J[..., :, i], copy=True)
        for j in range(i):
            r = np.einsum("...q,...q->...", E[..., :, j], v)
            R[..., j, i] = r
            v -= r[..., None] * E[..., :, j]
        nrm = np.linalg.norm(v, axis=-1)
        R[..., i, i] = nrm
        E[..., :, i] = v / nrm[..., None]
    return E, R


def tangent_frames_batch(chart, params):
    """Light-weight frames: (position, tangent_frame, frame_coords)."""
    params = np.asarray(params, dtype=float)
    pos = chart.eval(params)
    E, R = _mgs(chart.jacobian(params))
    W = np.linalg.solve(R, np.broadcast_to(
        np.eye(R.shape[-1]), R.shape).copy())
    return pos, E, W


def _normal_frames(chart, pos, E):
    q, n = E.shape[-2], E.shape[-1]
    if q - n == 1:
        nrm = chart.unit_normal(pos)
        if nrm is not None:
            return nrm[..., :, None]
    Q = np.linalg.qr(E, mode="complete")[0]
    return Q[..., n:]


def build_frames_batch(chart, params):
    """Frames plus shape operators at a batch of parameter points."""
    params = np.asarray(params, dtype=float)
    pos, E, W = tangent_frames_batch(chart, params)
    N = _normal_frames(chart, pos, E)
    H = chart.hessian(params)
    # components of the ambient hessian along each normal direction
    Hn = np.einsum("...qab,...qv->...vab", H, N)
    A = np.einsum("...ai,...vab,...bj->...vij", W, Hn, W)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    codim = N.shape[-1]
    if codim == 1:
        # orient hypersurface normals so convex bodies curve positively
        sign = np.where(np.trace(A[..., 0, :, :], axis1=-2, axis2=-1) < 0.0,
                        -1.0, 1.0)
        A = A * sign[..., None, None, None]
        N = N * sign[..., None, None]
    mean = np.einsum("...v,...qv->...q",
                     np.trace(A, axis1=-2, axis2=-1), N)
    return FrameBatch(params, pos, E, N, A, mean, W)


def build_frames(chart, params):
    """FramedPoint at a single parameter point."""
    batch = build_frames_batch(chart, np.asarray(params, dtype=float)[None, :])
    return batch.point(0)


def hypersurface_frames_at(chart, y):
    """Frames and shape operator of a hypersurface chart at ambient points.

    Works directly from the chart's closed-form unit normal and
    closest-point projection, so it is usable where the parameter chart
    degenerates.  Built-in unit normals point toward the convex side, so
    convex bodies get positive shape operators.

    Returns (tangent_frame (..., q, n), normal_frame (..., q, 1),
    sff (..., 1, n, n)).
    """
    y = np.asarray(y, dtype=float)
    q = chart.ambient_dim
    n = chart.param_dim
    nu = chart.unit_normal(y)
    if nu is None or q - n != 1:
        raise NotHypersurface("need a hypersurface chart with a unit normal")
    T = np.linalg.qr(nu[..., :, None], mode="complete")[0][..., 1:]
    if chart.kind == "sphere":
        A = np.broadcast_to(np.eye(n), y.shape[:-1] + (n, n)).copy()
        return T, nu[..., :, None], A[..., None, :, :]

    h = 1e-5 * (1.0 + float(np.max(np.abs(y))))

    def nu_along(i, c):
        return chart.unit_normal(chart.project(y + c * T[..., i]))

    rows = []
    for i in range(n):
        d1 = (nu_along(i, h) - nu_along(i, -h)) / (2.0 * h)
        d2 = (nu_along(i, h / 2.0) - nu_along(i, -h / 2.0)) / h
        dnu = (4.0 * d2 - d1) / 3.0
        # Weingarten map: A e_i = -(ambient derivative of the normal)
        rows.append(-np.einsum("...q,...qj->...j", dnu, T))
    A = np.stack(rows, axis=-2)
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    return T, nu[..., :, None], A[..., None, :, :]


def principal_curvatures(fp):
    """Ascending eigenvalues of the shape operator of a hypersurface sample."""
    if fp.sff.shape[0] != 1:
        raise NotHypersurface("principal curvatures need codimension one")
    return np.linalg.eigvalsh(fp.sff[0])


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True, eq=False)
class QuadratureSet:
    """Weighted parameter samples realizing integrals over the manifold."""

    chart: ImmersionChart
    params: np.ndarray
    weights: np.ndarray
    scheme: str
    seed: int | None = None

    @property
    def total_volume(self):
        return float(np.sum(self.weights))

    def __len__(self):
        return self.params.shape[0]

    @cached_property
    def frames(self):
        return build_frames_batch(self.chart, self.params)

    @cached_property
    def light_frames(self):
        return tangent_frames_batch(self.chart, self.params)

    @property
    def points(self):
        return [self.frames.point(i) for i in range(len(self))]

    def integrate(self, values):
        return float(np.sum(self.weights * np.asarray(values)))


def _axis_rule(lo, hi, count, periodic):
    if periodic:
        h = (hi - lo) / count
        nodes = lo + (np.arange(count) + 0.5) * h
        weights = np.full(count, h)
    else:
        x, w = np.polynomial.legendre.leggauss(count)
        nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        weights = 0.5 * (hi - lo) * w
    return nodes, weights


def build_quadrature(chart, resolution, scheme="product_trapezoid",
                     seed=None, n_samples=None):
    """Quadrature over a chart's parameter box with metric volume weights.

    scheme "product_trapezoid": tensor-product rule, midpoint offsets on
    periodic axes (trapezoid-equivalent there) and Gauss-Legendre nodes on
    bounded axes so degenerate boundary loci are never sampled.
    scheme "monte_carlo": Latin-hypercube box sampling (stratified per axis
    for variance reduction); requires seed and n_samples.
    """
    n = chart.param_dim
    if scheme == "monte_carlo":
        if seed is None or n_samples is None:
            raise ConfigError("monte_carlo scheme needs seed and n_samples")
        from scipy.stats import qmc

        lo = np.array([iv[0] for iv in chart.domain_box])
        hi = np.array([iv[1] for iv in chart.domain_box])
        unit = qmc.LatinHypercube(d=n, seed=int(seed)).random(int(n_samples))
        params = lo + (hi - lo) * unit
        base_w = np.full(int(n_samples), float(np.prod(hi - lo)) / int(n_samples))
    elif scheme == "product_trapezoid":
        if np.isscalar(resolution):
            resolution = [int(resolution)] * n
        if len(resolution) != n or any(r < 2 for r in resolution):
            raise ConfigError("need a per-axis resolution >= 2")
        axes = [_axis_rule(*chart.domain_box[a], resolution[a], chart.periodic[a])
                for a in range(n)]
        grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
        params = np.stack([g.ravel() for g in grids], axis=-1)
        wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
        base_w = np.prod(np.stack([w.ravel() for w in wgrids], axis=-1), axis=-1)
    else:
        raise ConfigError(f"unknown quadrature scheme {scheme!r}")
    J = chart.jacobian(params)
    g = np.einsum("...qa,...qb->...ab", J, J)
    dens = np.sqrt(np.maximum(np.linalg.det(g), 0.0))
    return QuadratureSet(chart, params, base_w * dens, scheme,
                         seed=None if seed is None else int(seed))


def grid_shape(quad):
    """Per-axis node counts of a product quadrature, else error."""
    if quad.scheme != "product_trapezoid":
        raise ConfigError("grid shape defined only for product quadratures")
    n = quad.chart.param_dim
    shape = []
    for a in range(n):
        shape.append(np.unique(np.round(quad.params[:, a], 12)).size)
    if int(np.prod(shape)) != len(quad):
        raise ConfigError("quadrature nodes do not form a product grid")
    return tuple(shape)

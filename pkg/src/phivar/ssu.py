"""Curvature-based instability tests for embedded manifolds.

Two quadratic forms built from the shape operators A_nu drive everything:

    Q = sum_nu (2 A_nu^2 - tr(A_nu) A_nu)     (averaged curvature operator)
    G = sum_nu (4 A_nu^2 - tr(A_nu) A_nu)     (quartic-energy stability form)

The manifold is "phi-SSU" when G is negative definite at every point, and
"p-SSU" when the quartic (p-2)|B(x,x)|^2 + <Qx,x> is negative on unit
tangent vectors.  Hypersurfaces admit closed-form criteria in terms of
principal curvatures, which serve as oracles for the search-based tests.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .charts import build_frames_batch, principal_curvatures
from .errors import DimensionTooSmall, NonConvergence


@dataclass(frozen=True, eq=False)
class SymmetricForm:
    """Dense symmetric bilinear form with cached eigenvalues."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @cached_property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ self.matrix @ x)


@dataclass(frozen=True)
class SsuVerdict:
    """Outcome of a definiteness test over sampled points."""

    is_ssu: bool
    worst_value: float
    witness_point: np.ndarray
    witness_direction: np.ndarray
    samples_tested: int
    method: str
    marginal: bool = False
    converged: bool = True


def definiteness_tol(sff):
    """Strictness tolerance 1e-9*(1+max|A|)^2 for eigenvalue sign tests."""
    return 1e-9 * (1.0 + float(np.max(np.abs(sff)))) ** 2


def q_operator_batch(sff):
    """Q = sum_nu (2 A_nu^2 - tr(A_nu) A_nu) for batched shape operators."""
    sff = np.asarray(sff, dtype=float)
    sq = np.einsum("...vij,...vjk->...ik", sff, sff)
    tr = np.trace(sff, axis1=-2, axis2=-1)
    return 2.0 * sq - np.einsum("...v,...vij->...ij", tr, sff)


def phi_form_batch(sff):
    """G = sum_nu (4 A_nu^2 - tr(A_nu) A_nu) for batched shape operators."""
    sff = np.asarray(sff, dtype=float)
    sq = np.einsum("...vij,...vjk->...ik", sff, sff)
    tr = np.trace(sff, axis1=-2, axis2=-1)
    return 4.0 * sq - np.einsum("...v,...vij->...ij", tr, sff)


def q_operator(fp):
    """Averaged curvature operator of a framed sample, in its tangent frame."""
    return SymmetricForm(q_operator_batch(fp.sff))


def phi_form(fp):
    """Stability form G of a framed sample; x^T G x < 0 for all unit x
    at every point makes the manifold phi-SSU."""
    return SymmetricForm(phi_form_batch(fp.sff))


def check_phi_ssu(chart, quad):
    """Eigen-exact phi-SSU verdict over the quadrature samples."""
    frames = quad.frames
    G = phi_form_batch(frames.sff)
    vals, vecs = np.linalg.eigh(G)
    top = vals[:, -1]
    i = int(np.argmax(top))
    worst = float(top[i])
    tol = definiteness_tol(frames.sff)
    return SsuVerdict(
        is_ssu=bool(worst < -tol),
        worst_value=worst,
        witness_point=frames.params[i].copy(),
        witness_direction=vecs[i, :, -1].copy(),
        samples_tested=len(quad),
        method="eigen_exact",
        marginal=bool(-tol <= worst <= tol),
    )


def hypersurface_phi_criterion(lams):
    """Closed-form hypersurface test: 0 < lam_1 and
    lam_n < (lam_1 + ... + lam_{n-1})/3."""
    lams = np.sort(np.asarray(lams, dtype=float))
    if lams.size < 2:
        raise DimensionTooSmall("need at least two principal curvatures")
    return bool(lams[0] > 0.0 and lams[-1] < np.sum(lams[:-1]) / 3.0)


def hypersurface_p_criterion(lams, p):
    """Closed-form hypersurface test with divisor p - 1."""
    if p < 2:
        raise ValueError("p must be >= 2")
    lams = np.sort(np.asarray(lams, dtype=float))
    if lams.size < 2:
        raise DimensionTooSmall("need at least two principal curvatures")
    return bool(lams[0] > 0.0 and lams[-1] < np.sum(lams[:-1]) / (p - 1.0))


def p_quartic_value(sff, Q, x):
    """(p-2)|B(x,x)|^2 + <Qx,x> with the p-dependent weight split off:
    returns (|B(x,x)|^2, x^T Q x)."""
    bxx = np.einsum("vij,i,j->v", sff, x, x)
    return float(bxx @ bxx), float(x @ Q @ x)


def check_p_ssu(fp, p, restarts=64, seed=0, max_iters=500, grad_tol=1e-12):
    """Maximize the p-instability quartic over unit tangent vectors.

    Projected gradient ascent with backtracking from `restarts` seeded
    random starts plus the eigenvector starts of the quadratic part.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    sff = fp.sff
    n = sff.shape[-1]
    Q = q_operator_batch(sff)
    tol = definiteness_tol(sff)

    def value(x):
        b, q = p_quartic_value(sff, Q, x)
        return (p - 2.0) * b + q

    def grad(x):
        bxx = np.einsum("vij,i,j->v", sff, x, x)
        gb = 4.0 * np.einsum("v,vij,j->i", bxx, sff, x)
        return (p - 2.0) * gb + 2.0 * (Q @ x)

    def value_batch(X):
        bxx = np.einsum("vij,si,sj->sv", sff, X, X)
        return (p - 2.0) * np.sum(bxx ** 2, axis=-1) + np.einsum(
            "si,ij,sj->s", X, Q, X)

    def grad_batch(X):
        bxx = np.einsum("vij,si,sj->sv", sff, X, X)
        gb = 4.0 * np.einsum("sv,vij,sj->si", bxx, sff, X)
        return (p - 2.0) * gb + 2.0 * X @ Q

    rng = np.random.default_rng(seed)
    evecs = np.linalg.eigh(Q + 2.0 * (p - 2.0) * np.einsum(
        "vij,vjk->ik", sff, sff))[1]
    X = np.vstack([rng.standard_normal((restarts, n)), evecs.T])
    X /= np.linalg.norm(X, axis=-1, keepdims=True)
    S = X.shape[0]
    settled = np.zeros(S, dtype=bool)  # gradient-stop or stalled line search
    for _ in range(max_iters):
        v0 = value_batch(X)
        g = grad_batch(X)
        gt = g - np.sum(g * X, axis=-1, keepdims=True) * X
        settled |= np.linalg.norm(gt, axis=-1) < grad_tol * (1.0 + np.abs(v0))
        active = ~settled
        if not np.any(active):
            break
        step = np.ones(S)
        improved = np.zeros(S, dtype=bool)
        Xn = X.copy()
        for _ in range(60):
            trial = X + step[:, None] * gt
            trial /= np.linalg.norm(trial, axis=-1, keepdims=True)
            newly = active & ~improved & (value_batch(trial) > v0)
            Xn[newly] = trial[newly]
            improved |= newly
            if np.all(improved | settled):
                break
            step = np.where(improved, step, 0.5 * step)
        settled |= active & ~improved  # cannot improve: numerical maximum
        X = Xn
    vals = np.argsort(value_batch(X))
    best = int(vals[-1])
    best_val = float(value_batch(X)[best])
    return SsuVerdict(
        is_ssu=bool(best_val < -tol),
        worst_value=best_val,
        witness_point=fp.params.copy(),
        witness_direction=X[best].copy(),
        samples_tested=S,
        method="quartic_search",
        marginal=bool(-tol <= best_val <= tol),
        converged=bool(settled[best]),
    )


def minimal_in_sphere_criterion(k, ric_lower):
    """Instability of compact minimal k-submanifolds of a unit sphere:
    Ricci lower bound must exceed (3/4)k."""
    return bool(ric_lower > 0.75 * k)


def minimal_in_ellipsoid_criterion(k, ric_lower, axes):
    """Ellipsoid version: threshold (3/4) k (max a)^2 / (min a)^4."""
    a = np.asarray(axes, dtype=float)
    return bool(ric_lower > 0.75 * k * np.max(a) ** 2 / np.min(a) ** 4)


def b1_norm_criterion(k, b1_norm_sq):
    """Pinching test ||B_1||^2 < (k-4)/(sqrt(k)+4); requires k > 4."""
    if k <= 4:
        raise DimensionTooSmall("criterion requires dimension k > 4")
    return bool(b1_norm_sq < (k - 4.0) / (np.sqrt(k) + 4.0))


def ellipsoid_curvature_bounds(axes):
    """Principal-curvature sandwich (min a/(max a)^2, max a/(min a)^2)."""
    a = np.asarray(axes, dtype=float)
    return float(np.min(a) / np.max(a) ** 2), float(np.max(a) / np.min(a) ** 2)


def random_shape_operator(n, rng):
    """Random positive-spectrum shape operator: eigenvalues log-uniform in
    [0.2, 5], conjugated by a random orthogonal matrix."""
    lams = np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=n))
    O = np.linalg.qr(rng.standard_normal((n, n)))[0]
    return O @ np.diag(lams) @ O.T


def synthetic_hypersurface_point(A):
    """FramedPoint-like sample of an abstract hypersurface with shape
    operator A, for criteria that only consume curvature data."""
    from .charts import FramedPoint

    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    E = np.vstack([np.eye(n), np.zeros((1, n))])
    N = np.zeros((n + 1, 1))
    N[n, 0] = 1.0
    A = 0.5 * (A + A.T)
    return FramedPoint(
        params=np.zeros(n), position=np.zeros(n + 1), tangent_frame=E,
        normal_frame=N, sff=A[None, :, :],
        mean_curvature=float(np.trace(A)) * N[:, 0], frame_coords=np.eye(n))

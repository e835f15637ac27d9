"""Generic finite-difference curvature oracle for coordinate-patch metrics.

Given a metric as a callable ``point -> symmetric matrix`` on a coordinate
box, Christoffel symbols are assembled from central differences of the metric,
Ricci from analytic contractions of those, and one Richardson extrapolation
level (steps h and h/2) removes the leading O(h^2) truncation error.

This module is deliberately independent of every closed-form curvature
formula in the package: it is the second route used to validate them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

__all__ = [
    "MetricPatch",
    "CurvatureReport",
    "GraphHypersurface",
    "SecondFundamentalFormReport",
    "numeric_curvature",
    "numeric_second_fundamental_form",
    "OracleDomainError",
    "NonSPDMetricError",
]

DEFAULT_STEP = 1e-3


class OracleDomainError(ValueError):
    """Evaluation point too close to the coordinate-box boundary."""


class NonSPDMetricError(ValueError):
    """Metric matrix not symmetric positive definite at the point."""


@dataclass(frozen=True)
class MetricPatch:
    """A coordinate-box metric.

    ``g`` must accept an array of points of shape (..., dim) and return the
    metric matrices with shape (..., dim, dim); it must be safe to call
    concurrently.
    """

    dim: int
    domain: tuple
    g: Callable[[np.ndarray], np.ndarray]

    def contains(self, point, margin: float = 0.0) -> bool:
        point = np.asarray(point, dtype=float)
        for x, (lo, hi) in zip(point, self.domain):
            if x < lo + margin or x > hi - margin:
                return False
        return True


@dataclass(frozen=True)
class CurvatureReport:
    point: np.ndarray
    ricci: np.ndarray
    scalar: float
    min_ricci_eigenvalue: float


def _metric_checked(patch: MetricPatch, point: np.ndarray) -> np.ndarray:
    g0 = patch.g(point[np.newaxis, :])[0]
    if not np.allclose(g0, g0.T, atol=1e-10 * (1.0 + np.abs(g0).max())):
        raise NonSPDMetricError("metric matrix is not symmetric at the point")
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError as exc:
        raise NonSPDMetricError("metric matrix is not positive definite at the point") from exc
    return g0


def _ricci_fixed_step(patch: MetricPatch, point: np.ndarray, h: np.ndarray) -> tuple:
    """Ricci tensor and metric at ``point`` using central differences.

    ``h`` is the per-coordinate step vector.
    """
    d = patch.dim
    # Stencil: center; +/- h e_k; the four corners +/- h e_k +/- h e_l, k < l.
    pts = [point]
    for k in range(d):
        for s in (+1.0, -1.0):
            q = point.copy()
            q[k] += s * h[k]
            pts.append(q)
    for k in range(d):
        for l in range(k + 1, d):
            for sk in (+1.0, -1.0):
                for sl in (+1.0, -1.0):
                    q = point.copy()
                    q[k] += sk * h[k]
                    q[l] += sl * h[l]
                    pts.append(q)
    G = patch.g(np.asarray(pts))
    g0 = G[0]

    dg = np.empty((d, d, d))      # dg[k, a, b] = d_k g_ab
    d2g = np.empty((d, d, d, d))  # d2g[m, k, a, b] = d^2_{mk} g_ab
    for k in range(d):
        gp, gm = G[1 + 2 * k], G[2 + 2 * k]
        dg[k] = (gp - gm) / (2.0 * h[k])
        d2g[k, k] = (gp - 2.0 * g0 + gm) / (h[k] * h[k])
    # Corners come in groups of four per (k, l): ++, +-, -+, --.
    ci = 1 + 2 * d
    for k in range(d):
        for l in range(k + 1, d):
            gpp, gpm, gmp, gmm = G[ci], G[ci + 1], G[ci + 2], G[ci + 3]
            mixed = (gpp - gpm - gmp + gmm) / (4.0 * h[k] * h[l])
            d2g[k, l] = mixed
            d2g[l, k] = mixed
            ci += 4

    ginv = np.linalg.inv(g0)
    # T[i, j, m] = d_i g_jm + d_j g_im - d_m g_ij
    T = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    gamma = 0.5 * np.einsum("lm,ijm->lij", ginv, T)

    # dT[m, i, j, k] = d_m T[i, j, k]
    dT = (d2g
          + d2g.transpose(0, 2, 1, 3)
          - d2g.transpose(0, 2, 3, 1))
    dginv = -np.einsum("la,mab,bk->mlk", ginv, dg, ginv)  # dginv[m, l, k] = d_m g^{lk}
    dgamma = 0.5 * (np.einsum("mlk,ijk->mlij", dginv, T)
                    + np.einsum("lk,mijk->mlij", ginv, dT))

    term1 = np.einsum("aajk->jk", dgamma)
    term2 = np.einsum("jaak->jk", dgamma)
    contracted = np.einsum("aab->b", gamma)
    term3 = np.einsum("b,bjk->jk", contracted, gamma)
    term4 = np.einsum("ajb,bak->jk", gamma, gamma)
    ric = term1 - term2 + term3 - term4
    return 0.5 * (ric + ric.T), g0


def _step_vector(patch: MetricPatch, step) -> np.ndarray:
    h = np.broadcast_to(np.asarray(step, dtype=float), (patch.dim,)).copy()
    if np.any(h <= 0):
        raise ValueError("steps must be positive")
    return h


def numeric_curvature(patch: MetricPatch, point, step=DEFAULT_STEP) -> CurvatureReport:
    """Ricci, scalar, and minimal Ricci eigenvalue (against g) at a point.

    ``step`` may be a scalar or a per-coordinate vector (use steps
    proportional to each coordinate's scale on anisotropic charts).  The
    point must be interior to the patch domain with margin >= 2*step.
    One Richardson level combines steps ``step`` and ``step/2``.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (patch.dim,):
        raise ValueError(f"point must have shape ({patch.dim},), got {point.shape}")
    h = _step_vector(patch, step)
    for x, (lo, hi), hk in zip(point, patch.domain, h):
        if x < lo + 2 * hk or x > hi - 2 * hk:
            raise OracleDomainError(
                f"point {point} within 2*step of the domain boundary")
    g0 = _metric_checked(patch, point)

    ric_h, _ = _ricci_fixed_step(patch, point, h)
    ric_h2, _ = _ricci_fixed_step(patch, point, h / 2.0)
    ric = (4.0 * ric_h2 - ric_h) / 3.0

    ginv = np.linalg.inv(g0)
    scalar = float(np.einsum("ij,ij->", ginv, ric))
    eigs = scipy.linalg.eigh(ric, g0, eigvals_only=True)
    return CurvatureReport(point=point, ricci=ric, scalar=scalar,
                           min_ricci_eigenvalue=float(eigs[0]))


@dataclass(frozen=True)
class GraphHypersurface:
    """A hypersurface given as a graph x_axis = height(other coordinates).

    ``height`` takes an array of shape (..., dim-1) of the non-axis
    coordinates (in their original order) and returns the axis coordinate.
    ``normal_sign`` picks the normal orientation: the unit normal is chosen
    with g-dual component along the axis of this sign (+1 means the normal
    points toward increasing x_axis).
    """

    axis: int
    height: Callable[[np.ndarray], np.ndarray]
    normal_sign: int = 1


@dataclass(frozen=True)
class SecondFundamentalFormReport:
    point: np.ndarray
    form: np.ndarray
    induced_metric: np.ndarray
    principal_curvatures: np.ndarray

    @property
    def mean_curvature(self) -> float:
        """Trace of the shape operator: sum of principal curvatures."""
        return float(np.sum(self.principal_curvatures))


def numeric_second_fundamental_form(patch: MetricPatch, hypersurface: GraphHypersurface,
                                    base_point, step=DEFAULT_STEP
                                    ) -> SecondFundamentalFormReport:
    """Second fundamental form of a graph hypersurface at a point.

    ``base_point`` gives the dim-1 non-axis coordinates; the axis coordinate
    is filled in from the graph.  The form is computed in the tangent basis
    T_i = e_i + (d height/d x_i) e_axis via II(X, Y) = g(nu, nabla_X Y) with
    ``nu`` the unit normal of the requested orientation.  ``step`` may be a
    scalar or a per-coordinate vector indexed like the patch coordinates.
    """
    d = patch.dim
    a = hypersurface.axis
    others = [i for i in range(d) if i != a]
    bp = np.asarray(base_point, dtype=float)
    if bp.shape != (d - 1,):
        raise ValueError(f"base point must have shape ({d - 1},), got {bp.shape}")
    h = _step_vector(patch, step)
    hb = h[others]

    # Height value, gradient, and Hessian by central differences.
    w0 = float(hypersurface.height(bp[np.newaxis, :])[0])
    m = d - 1
    pts = []
    for k in range(m):
        for s in (+1.0, -1.0):
            q = bp.copy()
            q[k] += s * hb[k]
            pts.append(q)
    for k in range(m):
        for l in range(k + 1, m):
            for sk in (+1.0, -1.0):
                for sl in (+1.0, -1.0):
                    q = bp.copy()
                    q[k] += sk * hb[k]
                    q[l] += sl * hb[l]
                    pts.append(q)
    W = np.asarray(hypersurface.height(np.asarray(pts)), dtype=float)
    grad = np.empty(m)
    hess = np.empty((m, m))
    for k in range(m):
        wp, wm = W[2 * k], W[2 * k + 1]
        grad[k] = (wp - wm) / (2.0 * hb[k])
        hess[k, k] = (wp - 2.0 * w0 + wm) / (hb[k] * hb[k])
    ci = 2 * m
    for k in range(m):
        for l in range(k + 1, m):
            wpp, wpm, wmp, wmm = W[ci], W[ci + 1], W[ci + 2], W[ci + 3]
            hess[k, l] = hess[l, k] = (wpp - wpm - wmp + wmm) / (4.0 * hb[k] * hb[l])
            ci += 4

    point = np.empty(d)
    point[others] = bp
    point[a] = w0
    for x, (lo, hi), hk in zip(point, patch.domain, h):
        if x < lo + 2 * hk or x > hi - 2 * hk:
            raise OracleDomainError(f"graph point {point} too close to the domain boundary")
    g0 = _metric_checked(patch, point)
    ginv = np.linalg.inv(g0)

    # Tangent vectors T_i = e_{others[i]} + grad_i e_a.
    tangents = np.zeros((m, d))
    for i, oi in enumerate(others):
        tangents[i, oi] = 1.0
        tangents[i, a] = grad[i]

    # Unit normal from the conormal d(x_a - height): components delta_a - grad.
    conormal = np.zeros(d)
    conormal[a] = 1.0
    for i, oi in enumerate(others):
        conormal[oi] = -grad[i]
    nu = ginv @ conormal
    norm = float(np.sqrt(nu @ g0 @ nu))
    if norm < 1e-14:
        raise ValueError("degenerate normal direction")
    nu /= norm
    if np.sign(nu[a]) != np.sign(hypersurface.normal_sign):
        nu = -nu

    # Christoffel symbols at the point (central differences of g).
    pts_g = [point]
    for k in range(d):
        for s in (+1.0, -1.0):
            q = point.copy()
            q[k] += s * h[k]
            pts_g.append(q)
    G = patch.g(np.asarray(pts_g))
    dg = np.empty((d, d, d))
    for k in range(d):
        dg[k] = (G[1 + 2 * k] - G[2 + 2 * k]) / (2.0 * h[k])
    T = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    gamma = 0.5 * np.einsum("lm,ijm->lij", ginv, T)

    gnu = g0 @ nu
    # II_ij = Hess_ij * (g nu)_a + Gamma^m_{bc} T_i^b T_j^c (g nu)_m
    gamma_term = np.einsum("mbc,ib,jc,m->ij", gamma, tangents, tangents, gnu)
    form = hess * gnu[a] + gamma_term
    form = 0.5 * (form + form.T)

    induced = tangents @ g0 @ tangents.T
    pcs = scipy.linalg.eigh(form, induced, eigvals_only=True)
    return SecondFundamentalFormReport(point=point, form=form, induced_metric=induced,
                                       principal_curvatures=np.asarray(pcs))

"""Coordinate-patch builders feeding the curvature oracle.

All charts use polar-type coordinates away from poles; the warped sphere
factors are represented in nested-angle (hyperspherical) coordinates, which
keep every metric here diagonal.  Grid sampling should stay at least
POLE_MARGIN radians away from the angle endpoints.
"""

from __future__ import annotations

import numpy as np

from .oracle import MetricPatch

__all__ = [
    "POLE_MARGIN",
    "ANGLE_BOX",
    "euclidean_patch",
    "sphere_stereographic",
    "sphere_polar",
    "cylinder_patch",
    "doubly_warped_patch",
    "product_line_patch",
    "scaled_patch",
]

POLE_MARGIN = 0.05
ANGLE_BOX = (POLE_MARGIN, np.pi - POLE_MARGIN)


def _unit_sphere_diag(angles: np.ndarray) -> np.ndarray:
    """Diagonal of the unit n-sphere metric in nested angles.

    ``angles`` has shape (..., n); entry k of the result is
    prod_{j<k} sin^2(angle_j).
    """
    n = angles.shape[-1]
    diag = np.ones(angles.shape[:-1] + (n,))
    if n > 1:
        s2 = np.sin(angles[..., :-1]) ** 2
        diag[..., 1:] = np.cumprod(s2, axis=-1)
    return diag


def euclidean_patch(d: int, half_width: float = 1.0) -> MetricPatch:
    """Flat metric on a centered coordinate box."""

    def g(x):
        x = np.asarray(x, dtype=float)
        eye = np.eye(d)
        return np.broadcast_to(eye, x.shape[:-1] + (d, d)).copy()

    return MetricPatch(dim=d, domain=tuple((-half_width, half_width) for _ in range(d)), g=g)


def sphere_stereographic(n: int, r: float, half_width: float = 0.8) -> MetricPatch:
    """Round n-sphere of radius r in a stereographic chart.

    g_ij = 4 r^4 / (r^2 + |x|^2)^2 delta_ij.
    """

    def g(x):
        x = np.asarray(x, dtype=float)
        conf = 4.0 * r ** 4 / (r ** 2 + np.sum(x * x, axis=-1)) ** 2
        eye = np.eye(n)
        return conf[..., np.newaxis, np.newaxis] * eye

    return MetricPatch(dim=n, domain=tuple((-half_width, half_width) for _ in range(n)), g=g)


def sphere_polar(n: int, r: float) -> MetricPatch:
    """Round n-sphere of radius r in nested-angle coordinates."""

    def g(x):
        x = np.asarray(x, dtype=float)
        diag = r ** 2 * _unit_sphere_diag(x)
        out = np.zeros(x.shape[:-1] + (n, n))
        idx = np.arange(n)
        out[..., idx, idx] = diag
        return out

    return MetricPatch(dim=n, domain=tuple(ANGLE_BOX for _ in range(n)), g=g)


def cylinder_patch(p: int, radius: float, t_half_width: float = 1.0) -> MetricPatch:
    """Metric line x round p-sphere: dt^2 + ds^2 + radius^2 sin^2(s/radius) ds_{p-1}^2.

    Coordinates: (t, s, p-1 nested angles); s is the geodesic distance from a
    pole of the sphere factor.
    """
    d = 2 + (p - 1)

    def g(x):
        x = np.asarray(x, dtype=float)
        s = x[..., 1]
        angles = x[..., 2:]
        out = np.zeros(x.shape[:-1] + (d, d))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        warp = (radius * np.sin(s / radius)) ** 2
        diag = warp[..., np.newaxis] * _unit_sphere_diag(angles)
        idx = np.arange(2, d)
        out[..., idx, idx] = diag
        return out

    s_box = (POLE_MARGIN * radius, (np.pi - POLE_MARGIN) * radius)
    domain = ((-t_half_width, t_half_width), s_box) + tuple(ANGLE_BOX for _ in range(p - 1))
    return MetricPatch(dim=d, domain=domain, g=g)


def doubly_warped_patch(f, h, p: int, q: int, t_domain) -> MetricPatch:
    """dt^2 + h(t)^2 ds_{q-1}^2 + f(t)^2 ds_{p-1}^2 with callables f, h.

    Coordinates: (t, q-1 angles for the first factor, p-1 angles for the
    second).  ``f`` and ``h`` must accept numpy arrays.
    """
    d = 1 + (q - 1) + (p - 1)

    def g(x):
        x = np.asarray(x, dtype=float)
        t = x[..., 0]
        u = x[..., 1:q]
        v = x[..., q:]
        out = np.zeros(x.shape[:-1] + (d, d))
        out[..., 0, 0] = 1.0
        hdiag = np.asarray(h(t))[..., np.newaxis] ** 2 * _unit_sphere_diag(u)
        fdiag = np.asarray(f(t))[..., np.newaxis] ** 2 * _unit_sphere_diag(v)
        iu = np.arange(1, q)
        iv = np.arange(q, d)
        out[..., iu, iu] = hdiag
        out[..., iv, iv] = fdiag
        return out

    domain = (tuple(t_domain),) + tuple(ANGLE_BOX for _ in range(d - 1))
    return MetricPatch(dim=d, domain=domain, g=g)


def product_line_patch(fiber_radius_of_t, fiber_dim: int, base_patch: MetricPatch
                       ) -> MetricPatch:
    """Warp a round sphere factor of given dimension over an existing patch.

    The new coordinates are (base coordinates..., fiber angles...); the fiber
    radius is a function of the *first* base coordinate only.
    """
    db = base_patch.dim
    d = db + fiber_dim

    def g(x):
        x = np.asarray(x, dtype=float)
        xb = x[..., :db]
        ang = x[..., db:]
        out = np.zeros(x.shape[:-1] + (d, d))
        out[..., :db, :db] = base_patch.g(xb)
        rad = np.asarray(fiber_radius_of_t(x[..., 0]))
        diag = rad[..., np.newaxis] ** 2 * _unit_sphere_diag(ang)
        idx = np.arange(db, d)
        out[..., idx, idx] = diag
        return out

    domain = base_patch.domain + tuple(ANGLE_BOX for _ in range(fiber_dim))
    return MetricPatch(dim=d, domain=domain, g=g)


def scaled_patch(patch: MetricPatch, lam: float) -> MetricPatch:
    """The same chart with metric multiplied by lam^2."""

    def g(x):
        return lam ** 2 * patch.g(x)

    return MetricPatch(dim=patch.dim, domain=patch.domain, g=g)

"""Finite-difference oracles used to validate the closed-form geometry.

Nothing here reuses the closed-form curvature code: the ambient oracles
differentiate the metric numerically, and the surface oracle differentiates
the unit normal of the profile curve numerically.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .warped import WarpingFunction, christoffel


def warped_metric(w: WarpingFunction):
    """Coordinate metric ``diag(1/F, s^2, s^2 sin^2 t1, ...)`` as a callable of ``x = (s, t1, ...)``."""

    def g(x):
        s, th = x[0], x[1:]
        d = np.empty(w.n)
        d[0] = 1.0 / float(w.F(s))
        sin2 = np.sin(th) ** 2
        for a in range(1, w.n):
            d[a] = s * s * np.prod(sin2[: a - 1])
        return np.diag(d)

    return g


def christoffel_fd(metric, x, h: float = 1e-4) -> np.ndarray:
    """``G[i, j, k] = Gamma^i_{jk}`` from central differences of the metric."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dg = np.empty((n, n, n))  # dg[k] = d_k g
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[k] = (metric(x + e) - metric(x - e)) / (2 * h)
    ginv = np.linalg.inv(metric(x))
    # Gamma_{l jk} = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
    low = 0.5 * (np.einsum("jlk->ljk", dg) + np.einsum("klj->ljk", dg) - dg)
    return np.einsum("il,ljk->ijk", ginv, low)


def ricci_fd(metric, x, h: float = 1e-3) -> np.ndarray:
    """Ricci tensor ``R_jk`` by central differences of finite-difference Christoffels."""
    x = np.asarray(x, dtype=float)
    n = x.size
    G = christoffel_fd(metric, x, h)
    dG = np.empty((n, n, n, n))  # dG[l, i, j, k] = d_l Gamma^i_{jk}
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dG[l] = (christoffel_fd(metric, x + e, h) - christoffel_fd(metric, x - e, h)) / (2 * h)
    term1 = np.einsum("iijk->jk", dG)
    term2 = np.einsum("kiji->jk", dG)
    term3 = np.einsum("iil,ljk->jk", G, G)
    term4 = np.einsum("ikl,lji->jk", G, G)
    return term1 - term2 + term3 - term4


def ambient_ricci_oracle(w: WarpingFunction, s: float, h: float = 1e-3):
    """``(ric_tangential, ric_radial_extra)`` read off the finite-difference Ricci tensor."""
    n = w.n
    x = np.concatenate([[s], np.full(n - 1, math.pi / 3)])
    g = warped_metric(w)
    R = ricci_fd(g, x, h)
    G = g(x)
    tang = R[1, 1] / G[1, 1]
    return tang, R[0, 0] / G[0, 0] - tang


class SurfaceOracle(NamedTuple):
    lam_meridian: np.ndarray
    lam_parallel: np.ndarray
    support: np.ndarray
    x_tangential: np.ndarray
    mixed_ricci: np.ndarray


def surface_oracle(w: WarpingFunction, profile, theta, h: float = 1e-3, ricci_step: float | None = None) -> SurfaceOracle:
    """Curvatures of the rotation hypersurface ``s = profile(theta)`` by finite differences.

    The meridian curvature is ``<D_T nu, T>/|T|^2`` with ``d nu/d theta`` taken by
    central differences of the unit normal and the connection term from the
    analytic Christoffel symbols of the ``(s, theta)`` plane. The parallel
    curvature is ``nu(log(s sin theta))``. With ``ricci_step`` set, the mixed
    Ricci component ``Ric(e_theta, nu)`` is also evaluated from
    :func:`ricci_fd` at the equator.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = w.n

    def frame(t):
        s = float(profile(t))
        ds = (float(profile(t + h)) - float(profile(t - h))) / (2 * h)
        if not w.s_min < s < w.s_max:
            raise DomainError("profile leaves the ambient domain")
        F = float(w.F(s))
        g = np.array([1.0 / F, s * s])
        T = np.array([ds, 1.0])
        nu = np.array([s * s, -ds / F])  # g-orthogonal to T, pointing to larger s
        nu /= math.sqrt(g @ (nu * nu))
        return s, T, nu, g

    lam_m, lam_p, sup, xt, ric = (np.empty(theta.size) for _ in range(5))
    for i, t in enumerate(theta):
        s, T, nu, g = frame(t)
        dnu = (frame(t + h)[2] - frame(t - h)[2]) / (2 * h)
        G = christoffel(w, np.array([s] + [t] + [math.pi / 2] * (n - 2)))[:2, :2, :2]
        Dnu = dnu + np.einsum("ijk,j,k->i", G, T, nu)
        T2 = g @ (T * T)
        lam_m[i] = g @ (Dnu * T) / T2
        # d log(s sin t) along nu
        lam_p[i] = nu[0] / s + nu[1] * math.cos(t) / math.sin(t)
        X = np.array([s * math.sqrt(float(w.F(s))), 0.0])  # h d/dr = s sqrt(F) d/ds
        sup[i] = g @ (X * nu)
        xt[i] = g @ (X * T) / math.sqrt(T2)
        if ricci_step is not None:
            # rotating along the meridian is an isometry that keeps the
            # (d/ds, d/dtheta) components, so sample away from the pole
            x = np.array([s] + [math.pi / 2] * (n - 1))
            R = ricci_fd(warped_metric(w), x, ricci_step)[:2, :2]
            ric[i] = T @ R @ nu / math.sqrt(T2)
        else:
            ric[i] = math.nan
    return SurfaceOracle(lam_m, lam_p, sup, xt, ric)


def first_variation_oracle(area, volume, r: float, h: float = 1e-4) -> float:
    """``dA/dV`` along a one-parameter family by central differences in ``r``."""
    return (area(r + h) - area(r - h)) / volume(r - h, r + h)

"""Axisymmetric star-shaped radial graphs in a warped product.

A surface is ``{s = s(theta)}`` where ``theta`` is the polar angle on
``S^{n-1}`` and ``s`` the area radius; it is invariant under the ``O(n-1)``
fixing the axis. Its principal curvatures are the meridian curvature and the
parallel curvature (multiplicity ``n-2``). Integrals over the surface use
Gauss-Legendre nodes in ``theta`` with the weight
``omega_{n-2} (s sin theta)^{n-2} |d/dtheta|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct
from scipy.special import eval_legendre

from ._numerics import gauss_legendre, omega
from .errors import DomainError, ParameterError, PreconditionError
from .newton import complement_sigma, elementary_symmetric
from .warped import WarpingFunction

CONVEX_TOL = 1e-12
FAMILIES = ("slice", "legendre", "offcenter")


@dataclass(frozen=True)
class Profile:
    """Closed-form area-radius profile ``s(theta)`` of a built-in family."""

    family: str
    s0: float = 1.0
    eps: float = 0.0
    k: int = 2
    center: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.s0 <= 0:
            raise ParameterError("profile radius must be positive")
        if self.family == "legendre" and (int(self.k) != self.k or self.k < 0):
            raise ParameterError("Legendre degree must be a non-negative integer")
        if self.family == "offcenter" and not abs(self.center) < self.s0:
            raise ParameterError("off-center sphere must contain the origin (|center| < radius)")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.family == "slice":
            return np.full_like(theta, self.s0)
        if self.family == "legendre":
            return self.s0 * (1.0 + self.eps * eval_legendre(self.k, np.cos(theta)))
        c, R = self.center, self.s0
        return c * np.cos(theta) + np.sqrt(R * R - (c * np.sin(theta)) ** 2)


@dataclass(frozen=True, eq=False)
class AxisymmetricSurface:
    warping: WarpingFunction
    profile: Profile
    theta: np.ndarray
    theta_weights: np.ndarray
    s: np.ndarray
    ds: np.ndarray
    dds: np.ndarray
    rule: str = "spectral"
    parametrization: str = "area_radius"
    star: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return self.warping.n

    @property
    def grid(self) -> int:
        return self.theta.size

    @property
    def star_shaped(self) -> bool:
        return bool(np.all(self.star >= 0))


def _spectral_derivatives(profile, theta):
    # s(theta) is even about both poles, so it is a cosine series. The
    # coefficients come from a DCT-II of the profile on uniform midpoint nodes
    # (an orthogonal transform); fitting on the clustered Gauss nodes directly
    # is badly conditioned.
    M = max(4 * theta.size, 256)
    mid = (np.arange(M) + 0.5) * math.pi / M
    coef = dct(profile(mid), type=2) / M
    coef[0] /= 2
    # coefficients at the rounding floor are noise; differentiation would
    # amplify them by j^2
    coef[np.abs(coef) < 8 * np.finfo(float).eps * np.max(np.abs(coef))] = 0.0
    j = np.arange(M)
    arg = np.outer(theta, j)
    d1 = -np.sin(arg) @ (j * coef)
    d2 = -np.cos(arg) @ (j * j * coef)
    return d1, d2


def build_surface(
    warping: WarpingFunction,
    family: str = "slice",
    *,
    s0: float,
    eps: float = 0.0,
    k: int = 2,
    center: float = 0.0,
    grid: int = 64,
    rule: str = "spectral",
) -> AxisymmetricSurface:
    """Sample a built-in profile family on ``grid`` Gauss-Legendre nodes in theta.

    Families: ``slice`` (``s = s0``), ``legendre``
    (``s = s0 (1 + eps P_k(cos theta))``) and ``offcenter`` (flat test mode
    only: the round sphere of radius ``s0`` whose center sits at distance
    ``center`` from the origin along the axis).
    """
    if family == "offcenter" and not warping.euclidean:
        raise ParameterError("the off-center sphere family is only available in Euclidean test mode")
    if grid < 4:
        raise ParameterError("grid must have at least 4 nodes")
    prof = Profile(family, s0=s0, eps=eps, k=k, center=center)
    theta, wt = gauss_legendre(grid, 0.0, math.pi)
    s = prof(theta)
    bad = (s <= warping.s_min) | (s >= warping.s_max)
    if np.any(bad):
        raise DomainError(f"profile leaves the ambient domain ({warping.s_min}, {warping.s_max})")
    if rule == "spectral":
        ds, dds = _spectral_derivatives(prof, theta)
    elif rule == "finite-difference":
        ds = np.gradient(s, theta, edge_order=2)
        dds = np.gradient(ds, theta, edge_order=2)
    else:
        raise ParameterError(f"unknown differentiation rule {rule!r}")
    F = warping.F(s)
    N = np.sqrt(F + (ds / s) ** 2)
    return AxisymmetricSurface(warping, prof, theta, wt, s, ds, dds, rule, star=np.sqrt(F) / N)


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """Per-node curvature data of an axisymmetric surface.

    ``lam`` stacks ``(lam_meridian, lam_parallel, ..., lam_parallel)`` with
    the parallel curvature repeated ``n-2`` times.
    """

    n: int
    theta: np.ndarray
    s: np.ndarray
    lam_meridian: np.ndarray
    lam_parallel: np.ndarray
    support: np.ndarray
    f: np.ndarray
    x_tangential: np.ndarray
    speed: np.ndarray
    weights: np.ndarray
    Q: np.ndarray

    @property
    def lam(self) -> np.ndarray:
        par = np.repeat(self.lam_parallel[:, None], self.n - 2, axis=1)
        return np.concatenate([self.lam_meridian[:, None], par], axis=1)

    @property
    def H(self) -> np.ndarray:
        return self.lam_meridian + (self.n - 2) * self.lam_parallel

    @property
    def convex(self) -> bool:
        return bool(min(self.lam_meridian.min(), self.lam_parallel.min()) >= -CONVEX_TOL)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    def sigma(self, p: int) -> np.ndarray:
        return elementary_symmetric(self.lam)[:, p]

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))


def surface_geometry(surface: AxisymmetricSurface) -> SurfaceGeometry:
    """Principal curvatures, support function and area weights at every node.

    Orientation is the outward normal (``<d/dr, nu> > 0``) and the second
    fundamental form is ``<D_{e_i} nu, e_j>``, so round slices have positive
    curvature ``f/h``.
    """
    w = surface.warping
    n = surface.n
    th, s, s1, s2 = surface.theta, surface.s, surface.ds, surface.dds
    F = w.F(s)
    dF = w.dF(s)
    if np.any(F <= 0):
        raise DomainError("surface touches the horizon")
    N = np.sqrt(F + (s1 / s) ** 2)
    T2 = s1 * s1 / F + s * s
    T = np.sqrt(T2)
    if np.any(~np.isfinite(N)) or np.any(N == 0):
        raise PreconditionError("unit normal is undefined")
    cot = np.cos(th) / np.sin(th)
    lam_par = (F / s - s1 * cot / s**2) / N
    lam_mer = (F * s + dF * s1 * s1 / (2 * F) + 2 * s1 * s1 / s - s2) / (N * T2)
    support = s * np.sqrt(F) / N
    x_tan = s * s1 / (np.sqrt(F) * T)
    weights = surface.theta_weights * omega(n - 2) * (s * np.sin(th)) ** (n - 2) * T
    return SurfaceGeometry(
        n=n,
        theta=th,
        s=s,
        lam_meridian=lam_mer,
        lam_parallel=lam_par,
        support=support,
        f=np.sqrt(F),
        x_tangential=x_tan,
        speed=T,
        weights=weights,
        Q=w.Q_closed(s),
    )


def mixed_ricci(geom: SurfaceGeometry, node: int | None = None):
    """``Ric(e_theta, nu) = -(n-2) Q <X, e_theta> <X, nu> / h^2`` at the nodes."""
    val = -(geom.n - 2) * geom.Q * geom.x_tangential * geom.support / geom.s**2
    return val if node is None else float(val[node])


def _check_p(n, p, lo=1):
    if not lo <= p <= n - 1:
        raise PreconditionError(f"p must lie in [{lo}, {n - 1}], got {p}")


def newton_divergence_pairing(geom: SurfaceGeometry, p: int) -> np.ndarray:
    """``sum_i <X, e_i> (D_j T^(p))(e_i, e_j)`` in its principal-frame closed form.

    Only the meridian direction carries a tangential component of X, so the
    sum over ``j`` reduces to that single term.
    """
    n = geom.n
    _check_p(n, p)
    if p == 1:
        return np.zeros_like(geom.s)
    sig = complement_sigma(geom.lam, p - 2)[:, 0]
    return -(n - p) / (n - 2) * sig * geom.x_tangential * mixed_ricci(geom)


def tangential_gradient_residual(geom: SurfaceGeometry) -> float:
    """Max-norm residual of ``D_i xi_j = f g_ij - <X,nu> h_ij`` for ``xi = X^T``.

    The covariant derivative of ``xi = <X,e_theta> e_theta`` is taken by
    second-order finite differences along the node grid: the meridian
    component is ``e_theta <X,e_theta>`` and the parallel one is
    ``<X,e_theta>`` times the geodesic curvature ``e_theta log(s sin theta)``
    of the orbit.
    """
    th = geom.theta
    d_xt = np.gradient(geom.x_tangential, th, edge_order=2) / geom.speed
    orbit = geom.s * np.sin(th)
    kg = np.gradient(orbit, th, edge_order=2) / (orbit * geom.speed)
    r_mer = d_xt - (geom.f - geom.support * geom.lam_meridian)
    r_par = geom.x_tangential * kg - (geom.f - geom.support * geom.lam_parallel)
    return float(max(np.max(np.abs(r_mer)), np.max(np.abs(r_par))))


def codazzi_residual(geom: SurfaceGeometry) -> float:
    """Max-norm residual of the conformally flat Codazzi identity (meridian, parallel, parallel).

    ``e_theta(lam_par) - (lam_mer - lam_par) kappa_g + Ric(e_theta, nu)/(n-2)``,
    differentiated by second-order finite differences along the grid.
    """
    th = geom.theta
    d_par = np.gradient(geom.lam_parallel, th, edge_order=2) / geom.speed
    orbit = geom.s * np.sin(th)
    kg = np.gradient(orbit, th, edge_order=2) / (orbit * geom.speed)
    res = d_par - (geom.lam_meridian - geom.lam_parallel) * kg + mixed_ricci(geom) / (geom.n - 2)
    return float(np.max(np.abs(res)))


def minkowski_gap(geom: SurfaceGeometry, p: int) -> float:
    """``p int <X,nu> sigma_p - (n-p) int f sigma_{p-1}``."""
    n = geom.n
    _check_p(n, p)
    e = elementary_symmetric(geom.lam)
    return geom.integrate(p * geom.support * e[:, p]) - geom.integrate((n - p) * geom.f * e[:, p - 1])


def minkowski_scale(geom: SurfaceGeometry, p: int) -> float:
    e = elementary_symmetric(geom.lam)
    return abs(geom.integrate((geom.n - p) * geom.f * e[:, p - 1]))


def heintze_karcher_gap(geom: SurfaceGeometry) -> float:
    """``(n-1) int f/H - int <X,nu>``; requires ``H > 0`` everywhere."""
    H = geom.H
    if np.any(H <= 0):
        raise PreconditionError("surface is not mean convex (H <= 0 at some node)")
    return geom.integrate((geom.n - 1) * geom.f / H) - geom.integrate(geom.support)


def heintze_karcher_scale(geom: SurfaceGeometry) -> float:
    return abs(geom.integrate(geom.support))


def weingarten_slice_test(geom: SurfaceGeometry, p: int, tol: float = 1e-10) -> tuple[bool, float]:
    """Whether ``sigma_p`` is constant over the nodes (to ``tol``), and its spread."""
    _check_p(geom.n, p)
    if not np.all(geom.support >= 0):
        raise PreconditionError("surface is not star-shaped")
    if not geom.convex:
        raise PreconditionError("surface is not convex")
    sig = geom.sigma(p)
    var = float(sig.max() - sig.min())
    return var < tol, var


def convexity_threshold(warping: WarpingFunction, s0: float, k: int = 2, grid: int = 64, tol: float = 1e-10) -> float:
    """Largest ``eps > 0`` for which the Legendre family stays convex and inside the domain."""

    def ok(eps):
        try:
            return surface_geometry(build_surface(warping, "legendre", s0=s0, eps=eps, k=k, grid=grid)).convex
        except (DomainError, PreconditionError):
            return False

    lo, hi = 0.0, 0.01
    while ok(hi):
        lo, hi = hi, 2 * hi
        if hi > 64:
            return math.inf
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def admissible_eps(warping: WarpingFunction, s0: float, eps: float, k: int = 2, grid: int = 64, max_halvings: int = 60) -> float:
    """Shrink ``eps`` by factors of 2 until the Legendre surface is convex."""
    for _ in range(max_halvings):
        try:
            geom = surface_geometry(build_surface(warping, "legendre", s0=s0, eps=eps, k=k, grid=grid))
            if geom.convex:
                return eps
        except (DomainError, PreconditionError):
            pass
        eps /= 2
    raise PreconditionError("no convex amplitude found")


COLUMNS = ("theta", "rho", "lambda_meridian", "lambda_parallel", "H", "support")


def to_columns(geom: SurfaceGeometry) -> str:
    """Whitespace-separated columns ``theta rho lambda_meridian lambda_parallel H support``.

    ``rho`` is the area radius of the profile at each node.
    """
    lines = ["# " + " ".join(COLUMNS)]
    data = np.column_stack([geom.theta, geom.s, geom.lam_meridian, geom.lam_parallel, geom.H, geom.support])
    for row in data:
        lines.append(" ".join(format(v, ".17g") for v in row))
    return "\n".join(lines) + "\n"


def from_columns(text: str) -> dict[str, np.ndarray]:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    data = np.array(rows, dtype=float).reshape(-1, len(COLUMNS))
    return {name: data[:, i] for i, name in enumerate(COLUMNS)}

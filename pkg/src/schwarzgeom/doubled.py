"""The doubled Schwarzschild manifold in its conformally flat chart.

The metric is ``u(x) delta`` on ``R^n \\ {0}`` with
``u = (1 + |x|^{2-n})^{4/(n-2)}``. The horizon is ``|x| = 1`` and the
inversion ``x -> x/|x|^2`` is an isometry. Centered coordinate spheres are the
spheres of symmetry; annuli between two of them are the two-sphere
isoperimetric candidates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import legendre as L
from scipy.optimize import brentq

from ._numerics import gauss_legendre, integrate, omega, sphere_rule
from .errors import DomainError, ParameterError, PreconditionError

log = logging.getLogger(__name__)

ROOT_XTOL = 1e-15


def _check_n(n):
    if int(n) != n or n < 3:
        raise ParameterError(f"dimension must be an integer >= 3, got {n}")


def _check_r(r):
    if not (np.all(np.asarray(r) > 0) and np.all(np.isfinite(r))):
        raise DomainError(f"radius must be positive and finite, got {r}")


def conformal_factor(n: int, x) -> float:
    """``(1 + |x|^{2-n})^{4/(n-2)}``; ``x`` is a point (array) or a radius."""
    _check_n(n)
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    if r == 0:
        raise DomainError("the conformal factor is singular at the origin")
    return (1.0 + r ** (2 - n)) ** (4.0 / (n - 2))


def sphere_area(n: int, r):
    """Area of the centered coordinate sphere of radius ``r``."""
    _check_n(n)
    _check_r(r)
    r = np.asarray(r, dtype=float)
    out = omega(n - 1) * r ** (n - 1) * (1.0 + r ** (2 - n)) ** (2 * (n - 1) / (n - 2))
    return float(out) if out.ndim == 0 else out


def volume_density(n: int, s):
    """Radial volume density ``omega_{n-1} s^{n-1} (1 + s^{2-n})^{2n/(n-2)}``."""
    s = np.asarray(s, dtype=float)
    return omega(n - 1) * s ** (n - 1) * (1.0 + s ** (2 - n)) ** (2 * n / (n - 2))


def annulus_volume(n: int, r0: float, r1: float, rtol: float = 1e-13) -> float:
    """Volume of ``{r0 <= |x| <= r1}``, integrated in ``t = log s``."""
    _check_n(n)
    _check_r(r0)
    _check_r(r1)
    if r0 > r1:
        raise DomainError(f"inner radius {r0} exceeds outer radius {r1}")
    if r0 == r1:
        return 0.0

    def integrand(t):
        # s^n (1 + s^{2-n})^{2n/(n-2)} = exp(n t) (1 + exp((2-n) t))^{2n/(n-2)}
        return math.exp(n * t + 2 * n / (n - 2) * math.log1p(math.exp((2 - n) * t)))

    return omega(n - 1) * integrate(integrand, math.log(r0), math.log(r1), rtol=rtol)


def sphere_mean_curvature(n: int, r, orientation: str = "outward"):
    """Mean curvature of the centered sphere of radius ``r``.

    ``outward`` uses the normal pointing to larger ``|x|``; ``inward`` the
    normal pointing toward the origin, which equals the outward value at
    ``1/r``.
    """
    _check_n(n)
    _check_r(r)
    r = np.asarray(r, dtype=float)
    if orientation == "inward":
        r = 1.0 / r
    elif orientation != "outward":
        raise ParameterError(f"orientation must be 'outward' or 'inward', got {orientation!r}")
    out = (n - 1) * _matching_profile(n, r)
    return float(out) if out.ndim == 0 else out


def _matching_profile(n, r):
    # r (r^{n-2} - 1) / (r^{n-2} + 1)^{n/(n-2)}
    u = r ** (n - 2)
    return r * (u - 1) / (u + 1) ** (n / (n - 2))


def matching_peak(n: int) -> tuple[float, float]:
    """Location ``r* > 1`` and value of the maximum of the outer matching profile.

    The critical point solves ``u^2 - 2(n-1) u + 1 = 0`` with ``u = r^{n-2}``.
    """
    _check_n(n)
    u = (n - 1) + math.sqrt(n * (n - 2))
    r = u ** (1.0 / (n - 2))
    return r, float(_matching_profile(n, r))


def area_variation_oracle(n: int, r: float, h: float = 1e-4) -> float:
    """``dA/dV`` along centered spheres by central differences."""
    return (sphere_area(n, r + h) - sphere_area(n, r - h)) / annulus_volume(n, r - h, r + h)


class MatchingRoots(NamedTuple):
    inner: list
    outer: list
    peak_radius: float
    peak_value: float
    merged: bool


def _outer_roots(n, level, xtol=ROOT_XTOL):
    rs, peak = matching_peak(n)
    g = lambda r: _matching_profile(n, r) - level
    if level < 0 or level > peak:
        return [], False
    if level == 0:
        return [1.0], False
    if peak - level <= 1e-14 * peak:
        return [rs], True
    near = brentq(g, 1.0, rs, xtol=xtol * rs, rtol=4 * np.finfo(float).eps, maxiter=500)
    hi = 2 * rs
    while g(hi) > 0:
        hi *= 2
        if hi > 1e300:
            raise PreconditionError("could not bracket the far root")
    far = brentq(g, rs, hi, xtol=xtol * rs, rtol=4 * np.finfo(float).eps, maxiter=500)
    return [near, far], False


def solve_matching(n: int, H_target: float) -> MatchingRoots:
    """Radii at which a centered sphere has mean curvature ``H_target``.

    Outer roots (``r > 1``) solve the outward equation and inner roots
    (``r < 1``) the inward one; the inner set is the reciprocal of the outer
    set. Above the peak both lists are empty; at the peak the two roots of
    each pair merge and ``merged`` is set.
    """
    _check_n(n)
    if H_target < 0:
        raise PreconditionError("H_target must be non-negative")
    rs, peak = matching_peak(n)
    outer, merged = _outer_roots(n, H_target / (n - 1))
    inner = sorted(1.0 / r for r in outer)
    return MatchingRoots(inner, outer, rs, peak, merged)


@dataclass(frozen=True)
class IsoperimetricCandidate:
    """Annulus ``B_{r1} \\ B_{r0}`` whose two boundary spheres have equal mean curvature.

    ``H`` is taken with respect to the normal pointing out of the annulus.
    """

    n: int
    r0: float
    r1: float
    H: float
    volume: float
    area: float
    label: str


def _candidate(n, r0, r1, label, volume=None):
    V = annulus_volume(n, r0, r1) if volume is None else volume
    return IsoperimetricCandidate(
        n=n,
        r0=r0,
        r1=r1,
        H=sphere_mean_curvature(n, r1),
        volume=V,
        area=sphere_area(n, r0) + sphere_area(n, r1),
        label=label,
    )


def asymmetric_from_outer(n: int, r1: float) -> IsoperimetricCandidate:
    """Asymmetric candidate whose outer sphere is the far root ``r1 >= r*``.

    The inner sphere is the reciprocal of the near root at the same mean
    curvature; its mirror image under inversion has the same area and volume.
    """
    _check_n(n)
    rs, _ = matching_peak(n)
    if r1 < rs:
        raise PreconditionError(f"far outer radius must be at least {rs}")
    near = _outer_roots(n, float(_matching_profile(n, r1)))[0][0] if r1 > rs else rs
    return _candidate(n, 1.0 / near, r1, "asymmetric-far")


def _solve_volume(fun, V, lo, hi):
    # fun is increasing in log-radius on [lo, hi]
    t = brentq(lambda t: fun(math.exp(t)) / V - 1.0, math.log(lo), math.log(hi), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(t)


def isoperimetric_candidates(n: int, V: float, scan: int = 64) -> list[IsoperimetricCandidate]:
    """All two-sphere candidates enclosing volume ``V``.

    The symmetric branch ``r0 r1 = 1`` always closes. The asymmetric branch
    is parametrized by the far outer root and scanned on a log grid for
    volume crossings; each crossing is polished by Brent's method and
    reported together with its mirror image under inversion.
    Ordering is by label, then outer radius.
    """
    _check_n(n)
    if not V > 0:
        raise PreconditionError("volume must be positive")
    out = []
    half = lambda r: 2 * annulus_volume(n, 1.0, r)
    hi = 2.0
    while half(hi) < V:
        hi *= 2
    r1 = _solve_volume(half, V, 1.0 + 1e-12, hi)
    out.append(_candidate(n, 1.0 / r1, r1, "symmetric"))

    rs, _ = matching_peak(n)
    vol_asym = lambda r: asymmetric_from_outer(n, r).volume
    lo_v = vol_asym(rs)
    if V <= lo_v:
        log.info("no asymmetric candidate: V=%g is below the branch minimum %g", V, lo_v)
    else:
        hi = 2 * rs
        while vol_asym(hi) < V:
            hi *= 2
        grid = np.geomspace(rs, hi, scan)
        vals = np.array([vol_asym(r) for r in grid]) - V
        for k in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
            rb = _solve_volume(vol_asym, V, grid[k], grid[k + 1])
            far = asymmetric_from_outer(n, rb)
            out.append(far)
            mirror = IsoperimetricCandidate(n, 1.0 / far.r1, 1.0 / far.r0, far.H, far.volume, far.area, "asymmetric-near-horizon")
            out.append(mirror)
    out.sort(key=lambda c: (c.label, c.r1))
    return out


def euclidean_ratio_bound(n: int, V: float) -> float:
    """Flat isoperimetric area ``(n^{n-1} omega_{n-1})^{1/n} V^{(n-1)/n}``."""
    _check_n(n)
    if not V > 0:
        raise PreconditionError("volume must be positive")
    return (n ** (n - 1) * omega(n - 1)) ** (1.0 / n) * V ** ((n - 1) / n)


@dataclass(frozen=True)
class ProfilePoint:
    V: float
    r0_sym: float
    r1_sym: float
    area_symmetric: float
    r0_asym: float
    r1_asym: float
    area_asymmetric: float
    euclidean_bound: float
    best_label: str


PROFILE_COLUMNS = ("V", "r0_sym", "r1_sym", "area_sym", "r0_asym", "r1_asym", "area_asym", "euclidean_bound", "best_label")


def profile_point(n: int, V: float) -> ProfilePoint:
    """Symmetric and asymmetric candidate areas at volume ``V``.

    ``best_label`` names the smallest of the symmetric area, the asymmetric
    area and the Euclidean bound; the last is labelled ``offcenter`` since
    far off-center regions approach it from below. Missing asymmetric
    candidates are reported as NaN.
    """
    cands = isoperimetric_candidates(n, V)
    sym = next(c for c in cands if c.label == "symmetric")
    asym = [c for c in cands if c.label == "asymmetric-far"]
    a = min(asym, key=lambda c: c.area) if asym else None
    bound = euclidean_ratio_bound(n, V)
    options = {"symmetric": sym.area, "offcenter": bound}
    if a is not None:
        options["asymmetric"] = a.area
    best = min(options, key=options.get)
    nan = math.nan
    return ProfilePoint(
        V=V,
        r0_sym=sym.r0,
        r1_sym=sym.r1,
        area_symmetric=sym.area,
        r0_asym=a.r0 if a else nan,
        r1_asym=a.r1 if a else nan,
        area_asymmetric=a.area if a else nan,
        euclidean_bound=bound,
        best_label=best,
    )


def profile_sweep(n: int, V_min: float, V_max: float, steps: int) -> list[ProfilePoint]:
    """Profile points on a logarithmic volume grid."""
    if not 0 < V_min < V_max:
        raise PreconditionError("need 0 < V_min < V_max")
    if steps < 2:
        raise PreconditionError("need at least 2 steps")
    return [profile_point(n, float(V)) for V in np.geomspace(V_min, V_max, steps)]


class BrayProbe(NamedTuple):
    area_difference: float
    area: float
    volume: float
    matched_radius: float


def _radial_volume(n, R, nodes):
    # int_1^R density(s) ds by Gauss-Legendre, vectorized over R
    x, w = gauss_legendre(nodes, 0.0, 1.0)
    R = np.atleast_1d(R)
    s = 1.0 + np.outer(R - 1.0, x)
    dens = s ** (n - 1) * (1.0 + s ** (2 - n)) ** (2 * n / (n - 2))
    return (R - 1.0) * (dens @ w)


def bray_probe(n: int, base_radius: float = 2.0, coefficients=(0.0, 0.0, 1.0), eps: float = 0.0, nodes: int = 64) -> BrayProbe:
    """Area excess of a perturbed sphere over the sphere of symmetry with equal volume.

    The surface is the radial graph ``R = base_radius (1 + eps sum_k c_k P_k(cos theta))``
    around the origin. Its volume is the oriented volume between it and the
    horizon; the comparison sphere encloses the same volume with the horizon.
    Both volumes use the same radial rule so that discretization errors cancel.
    """
    _check_n(n)
    if base_radius <= 1:
        raise PreconditionError("base radius must lie outside the horizon")
    c = np.asarray(coefficients, dtype=float)
    x, w = sphere_rule(n, nodes)
    P = L.legval(x, c)
    dP = L.legval(x, L.legder(c)) if c.size > 1 else np.zeros_like(x)
    R = base_radius * (1.0 + eps * P)
    if np.any(R <= 1.0):
        raise PreconditionError("perturbed surface crosses the horizon")
    # dR/dtheta = -sin(theta) dR/dx, and |dR/dtheta|^2 = (1 - x^2) (dR/dx)^2
    dR2 = (1.0 - x * x) * (base_radius * eps * dP) ** 2
    conf = (1.0 + R ** (2 - n)) ** (2 * (n - 1) / (n - 2))
    area = float(np.sum(w * conf * R ** (n - 2) * np.sqrt(R * R + dR2)))
    vol = float(np.sum(w * _radial_volume(n, R, nodes)))
    sphere_vol = lambda r: float(omega(n - 1) * _radial_volume(n, r, nodes)[0])
    hi = base_radius * 2
    while sphere_vol(hi) < vol:
        hi *= 2
    rm = brentq(lambda r: sphere_vol(r) - vol, 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return BrayProbe(area - sphere_area(n, rm), area, vol, rm)

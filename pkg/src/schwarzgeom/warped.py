"""Warped-product ambient manifolds of deSitter-Schwarzschild type.

The metric is ``dr^2 + h(r)^2 g_{S^{n-1}}``. Everything here is parametrized by
the area radius ``s = h(r)``, in which the deSitter-Schwarzschild metric reads
``ds^2 / F(s) + s^2 g_{S^{n-1}}`` with ``F(s) = 1 - m s^{2-n} - kappa s^2``.
In that variable ``h = s``, ``h' = sqrt(F)`` and ``h'' = F'(s) / 2``; the
geodesic radius is recovered on demand by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ._numerics import DEFAULT_RTOL, integrate
from .errors import DomainError, ParameterError, PreconditionError

H3_TOL = 1e-12


@dataclass(frozen=True)
class AmbientParams:
    """Dimension ``n``, mass ``m`` and cosmological constant ``kappa``.

    ``m = 0`` is only accepted together with ``kappa = 0``; that is the flat
    "Euclidean test mode" where ``h(r) = r``.
    """

    n: int
    m: float
    kappa: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ParameterError(f"dimension must be an integer >= 3, got {self.n}")
        if not (math.isfinite(self.m) and math.isfinite(self.kappa)):
            raise ParameterError("m and kappa must be finite")
        if self.m < 0:
            raise ParameterError(f"mass must be non-negative, got m={self.m}")
        if self.m == 0 and self.kappa != 0:
            raise ParameterError("m = 0 is only supported with kappa = 0 (Euclidean test mode)")
        if self.m > 0 and self.kappa > 0:
            c = self.constraint_value
            if not c < 1:
                raise ParameterError(
                    f"parameter constraint n^n m^2 kappa^(n-2) / (4 (n-2)^(n-2)) < 1 violated: value {c:.6g}"
                )

    @property
    def constraint_value(self) -> float:
        n, m, k = self.n, self.m, self.kappa
        if k <= 0:
            return 0.0
        return n**n * m**2 * k ** (n - 2) / (4 * (n - 2) ** (n - 2))

    @property
    def euclidean(self) -> bool:
        return self.m == 0 and self.kappa == 0


def _F_direct(p: AmbientParams, s):
    s = np.asarray(s, dtype=float)
    return 1.0 - p.m * s ** (2 - p.n) - p.kappa * s**2


def positivity_interval(params: AmbientParams) -> tuple[float, float]:
    """The interval ``(s_min, s_max)`` on which ``F > 0``; ``s_max`` may be ``inf``."""
    n, m, k = params.n, params.m, params.kappa
    if params.euclidean:
        return 0.0, math.inf
    if k == 0:
        return m ** (1.0 / (n - 2)), math.inf
    F = lambda s: float(_F_direct(params, s))
    if k < 0:
        # F is increasing; the root lies below m^(1/(n-2)) where F = -kappa s^2 > 0
        hi = m ** (1.0 / (n - 2))
        lo = hi / 2
        while F(lo) >= 0:
            lo /= 2
        return brentq(F, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=500), math.inf
    s_peak = ((n - 2) * m / (2 * k)) ** (1.0 / n)
    if F(s_peak) <= 0:
        raise ParameterError("F has no positivity interval for these parameters")
    lo = s_peak / 2
    while F(lo) >= 0:
        lo /= 2
    hi = 1.0 / math.sqrt(k)
    while F(hi) >= 0:
        hi *= 2
    rtol = 4 * np.finfo(float).eps
    inner = brentq(F, lo, s_peak, xtol=1e-15 * lo, rtol=rtol, maxiter=500)
    outer = brentq(F, s_peak, hi, xtol=1e-15 * s_peak, rtol=rtol, maxiter=500)
    return inner, outer


class WarpingData(NamedTuple):
    h: np.ndarray
    f: np.ndarray
    h_second: np.ndarray


class AmbientCurvature(NamedTuple):
    ric_tangential: np.ndarray
    ric_radial_extra: np.ndarray
    scalar: np.ndarray
    Q: np.ndarray


@dataclass(frozen=True)
class WarpingFunction:
    """Warping profile of a deSitter-Schwarzschild manifold in the area radius."""

    params: AmbientParams
    s_min: float = field(init=False)
    s_max: float = field(init=False)
    rtol: float = DEFAULT_RTOL

    def __post_init__(self):
        lo, hi = positivity_interval(self.params)
        object.__setattr__(self, "s_min", lo)
        object.__setattr__(self, "s_max", hi)

    @classmethod
    def from_constants(cls, n: int, m: float, kappa: float = 0.0, rtol: float = DEFAULT_RTOL):
        return cls(AmbientParams(n, m, kappa), rtol=rtol)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def euclidean(self) -> bool:
        return self.params.euclidean

    def _check(self, s, closed: bool = True):
        s = np.asarray(s, dtype=float)
        bad = (s < self.s_min) if closed else (s <= self.s_min)
        bad = bad | (s >= self.s_max) | ~np.isfinite(s)
        if np.any(bad):
            raise DomainError(f"s outside [{self.s_min}, {self.s_max}): {s[bad] if s.ndim else s}")
        return s

    def F(self, s):
        """``1 - m s^{2-n} - kappa s^2``, written so that ``F(s_min) == 0`` exactly."""
        p = self.params
        s = np.asarray(s, dtype=float)
        if p.m == 0:
            return np.ones_like(s)
        n, a = p.n, self.s_min
        u = (s - a) / a
        # m (a^{2-n} - s^{2-n}) - kappa (s^2 - a^2)
        out = -p.m * a ** (2 - n) * np.expm1((2 - n) * np.log1p(u)) - p.kappa * (s - a) * (s + a)
        return out

    def _F_offset(self, root: float, d: float) -> float:
        """``F(root + d)`` for a root of F, without forming ``root + d``."""
        p = self.params
        return float(-p.m * root ** (2 - p.n) * math.expm1((2 - p.n) * math.log1p(d / root)) - p.kappa * d * (2 * root + d))

    def dF(self, s):
        p = self.params
        s = np.asarray(s, dtype=float)
        if p.m == 0:
            return np.zeros_like(s)
        return (p.n - 2) * p.m * s ** (1 - p.n) - 2 * p.kappa * s

    def Q_closed(self, s):
        """Closed form ``n m / (2 s^n)`` of ``h''/h + (1 - h'^2)/h^2``."""
        s = np.asarray(s, dtype=float)
        return self.n * self.params.m / (2 * s**self.n)

    def geodesic_radius(self, s):
        """Geodesic distance from the horizon (or the origin in test mode)."""
        s = self._check(s)
        if self.params.m == 0:
            return s.copy() if s.ndim else float(s)
        a, b = self.s_min, self.s_max
        mid = 0.5 * (a + b) if math.isfinite(b) else math.inf

        def inner(xi):
            # t = s_min + xi^2 removes the inverse square-root singularity
            F = self._F_offset(a, xi * xi)
            return 2.0 * xi / math.sqrt(F) if F > 0 else 2.0 / math.sqrt(float(self.dF(a)))

        def outer(eta):
            # same at the cosmological end, t = s_max - eta^2
            F = self._F_offset(b, -eta * eta)
            return 2.0 * eta / math.sqrt(F) if F > 0 else 2.0 / math.sqrt(-float(self.dF(b)))

        def one(x):
            if x == a:
                return 0.0
            if x <= mid:
                return integrate(inner, 0.0, math.sqrt(x - a), rtol=self.rtol)
            r_mid = integrate(inner, 0.0, math.sqrt(mid - a), rtol=self.rtol)
            return r_mid + integrate(outer, math.sqrt(b - x), math.sqrt(b - mid), rtol=self.rtol)

        if s.ndim == 0:
            return one(float(s))
        return np.array([one(float(x)) for x in s.ravel()]).reshape(s.shape)


def warping_data(w: WarpingFunction, s) -> WarpingData:
    """``(h, h', h'')`` at area radius ``s``; derivatives are with respect to geodesic radius."""
    s = w._check(s)
    F = w.F(s)
    return WarpingData(s * 1.0, np.sqrt(np.maximum(F, 0.0)), 0.5 * w.dF(s))


def geodesic_radius(w: WarpingFunction, s):
    return w.geodesic_radius(s)


def ambient_curvature(w: WarpingFunction, s) -> AmbientCurvature:
    """Ricci coefficients and scalar curvature from the warped-product formulas.

    ``Ric = ric_tangential * g + ric_radial_extra * dr (x) dr``.
    """
    s = w._check(s)
    n, m, k = w.n, w.params.m, w.params.kappa
    # a = h''/h and b = (1 - h'^2)/h^2 are linear in (m, kappa); keeping the two
    # parts apart lets the kappa terms cancel exactly in Q and the mass terms
    # in the scalar curvature, instead of leaving rounding of size kappa
    ms = m * s ** (-n)
    a_m, a_k = 0.5 * (n - 2) * ms, -k * np.ones_like(ms)
    b_m, b_k = ms, k * np.ones_like(ms)

    def comb(x, y):
        return (x * a_m + y * b_m) + (x * a_k + y * b_k)

    return AmbientCurvature(
        ric_tangential=-comb(1.0, -(n - 2)),
        ric_radial_extra=-(n - 2) * comb(1.0, 1.0),
        scalar=-(n - 1) * comb(2.0, -(n - 2)),
        Q=comb(1.0, 1.0),
    )


@dataclass
class ConditionReport:
    h1_ok: bool
    h2_ok: bool
    h3_ok: bool
    h4_ok: bool
    h1_witness: list = field(default_factory=list)
    h2_witness: list = field(default_factory=list)
    h3_witness: list = field(default_factory=list)
    h4_witness: list = field(default_factory=list)
    grid_size: int = 0
    grid_min: float = math.nan
    grid_max: float = math.nan

    @property
    def all_ok(self) -> bool:
        return self.h1_ok and self.h2_ok and self.h3_ok and self.h4_ok


def default_grid(w: WarpingFunction, count: int = 50) -> np.ndarray:
    """Sorted interior grid spanning ``(s_min + delta, min(s_max, 10 s_min))``."""
    if w.s_min == 0:
        lo, hi = 0.1, 10.0
    else:
        hi = min(w.s_max, 10 * w.s_min)
        span = hi - w.s_min
        lo = w.s_min + 1e-3 * span
        hi = hi - (1e-3 * span if math.isfinite(w.s_max) and hi == w.s_max else 0.0)
    return np.linspace(lo, hi, count)


def check_conditions(w: WarpingFunction, grid) -> ConditionReport:
    """Sample conditions (H1)-(H4) on a grid of area radii.

    H1 is evaluated at the inner endpoint. H3 is monotonicity of
    ``2 h''/h - (n-2)(1-h'^2)/h^2`` along the grid, with slack ``H3_TOL``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise PreconditionError("empty grid")
    if np.any(np.diff(grid) <= 0):
        raise PreconditionError("grid must be strictly increasing")
    w._check(grid, closed=False)
    n = w.n

    _, f0, h20 = warping_data(w, w.s_min)
    h1 = bool(abs(float(f0)) < 1e-12 and float(h20) > 0)

    h, f, h2 = warping_data(w, grid)
    h2_bad = grid[f <= 0]
    q = 2 * h2 / h - (n - 2) * (1 - f * f) / h**2
    dq = np.diff(q)
    slack = H3_TOL * np.maximum(1.0, np.abs(q[1:]))
    h3_bad = grid[1:][dq < -slack]
    Q = ambient_curvature(w, grid).Q
    h4_bad = grid[Q <= 0]
    return ConditionReport(
        h1_ok=h1,
        h2_ok=h2_bad.size == 0,
        h3_ok=h3_bad.size == 0,
        h4_ok=h4_bad.size == 0,
        h1_witness=[] if h1 else [w.s_min],
        h2_witness=h2_bad.tolist(),
        h3_witness=h3_bad.tolist(),
        h4_witness=h4_bad.tolist(),
        grid_size=int(grid.size),
        grid_min=float(grid[0]),
        grid_max=float(grid[-1]),
    )


def christoffel(w: WarpingFunction, x) -> np.ndarray:
    """Analytic Christoffel symbols ``G[i, j, k] = Gamma^i_{jk}``.

    Coordinates are ``(s, theta_1, ..., theta_{n-1})`` with the metric
    ``diag(1/F, s^2, s^2 sin^2 theta_1, s^2 sin^2 theta_1 sin^2 theta_2, ...)``.
    """
    x = np.asarray(x, dtype=float)
    n = w.n
    if x.shape != (n,):
        raise PreconditionError(f"expected {n} coordinates, got shape {x.shape}")
    s, th = x[0], x[1:]
    F = float(w.F(s))
    g = np.empty(n)
    g[0] = 1.0 / F
    sin2 = np.sin(th) ** 2
    for a in range(1, n):
        g[a] = s * s * np.prod(sin2[: a - 1])
    dg = np.zeros((n, n))  # dg[k, i] = d_k g_ii
    dg[0, 0] = -float(w.dF(s)) / F**2
    dg[0, 1:] = 2 * g[1:] / s
    cot = np.cos(th) / np.sin(th)
    for a in range(1, n):
        for b in range(1, a):
            dg[b, a] = 2 * cot[b - 1] * g[a]
    G = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            G[i, i, j] += dg[j, i] / (2 * g[i])
            if j != i:
                G[i, j, i] += dg[j, i] / (2 * g[i])
                G[i, j, j] = -dg[i, j] / (2 * g[i])
    return G


def conformal_field_residual(w: WarpingFunction, s: float, step: float, angles=None) -> float:
    """Max-norm residual of ``D X - f g`` for ``X = h d/dr``.

    Partial derivatives of X are taken by central differences with ``step``;
    the connection terms use the analytic Christoffel symbols. The mixed
    tensor ``(D X)^i_j`` is compared with ``f delta^i_j``.
    """
    n = w.n
    if step <= 0:
        raise PreconditionError("step must be positive")
    if s - step <= w.s_min or s + step >= w.s_max:
        raise PreconditionError(f"stencil [{s - step}, {s + step}] leaves the domain")
    if angles is None:
        angles = np.full(n - 1, math.pi / 3)
    x = np.concatenate([[s], np.asarray(angles, dtype=float)])

    def X(y):
        out = np.zeros(n)
        out[0] = y[0] * math.sqrt(float(w.F(y[0])))
        return out

    dX = np.empty((n, n))  # dX[i, j] = d_j X^i
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        dX[:, j] = (X(x + e) - X(x - e)) / (2 * step)
    G = christoffel(w, x)
    cov = dX + np.einsum("ijk,k->ij", G, X(x))
    f = math.sqrt(float(w.F(s)))
    return float(np.max(np.abs(cov - f * np.eye(n))))

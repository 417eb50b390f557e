"""Coordinate balls far from the horizon in the doubled Schwarzschild chart.

The chart is centered on the ball, so the metric is
``phi^{4/(n-2)} delta`` with ``phi(y) = 1 + |y + a|^{2-n}``; the ball is
``|y| <= r`` and ``x`` below is the cosine of the angle between ``y`` and
``a``. The module provides the asymptotic expansions in ``1/|a|`` of the
area and volume of the ball and of a perturbed ball, and quadrature oracles
for all of them.

Exact integrals are computed in "excess" form: with ``P = 1 + |a|^{2-n}``,
``(phi/P)^q - 1`` is evaluated through ``expm1``/``log1p`` so that the
small corrections are resolved to full relative precision instead of
drowning in the leading term.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ._numerics import gauss_legendre, loglog_slope, omega, sphere_rule
from .doubled import euclidean_ratio_bound
from .errors import NumericError, ParameterError, PreconditionError, RegimeWarning

REGIME_RATIO = 5.0
DEFAULT_NODES = 64
MAX_NODES = 2048
AUDIT_RTOL = 1e-12
NOISE_FACTOR = 10.0
_ROUND = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class OffCenterBall:
    """Ball ``|y| <= r`` whose center lies at distance ``a_mag`` from the puncture."""

    n: int
    r: float
    a_mag: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ParameterError(f"dimension must be an integer >= 3, got {self.n}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ParameterError("radius must be positive")
        if not (self.a_mag > self.r and math.isfinite(self.a_mag)):
            raise ParameterError(f"ball must avoid the puncture: need |a| > r, got |a|={self.a_mag}, r={self.r}")

    @property
    def asymptotic(self) -> bool:
        return self.a_mag >= REGIME_RATIO * self.r

    @property
    def P(self) -> float:
        return 1.0 + self.a_mag ** (2 - self.n)

    @property
    def area_power(self) -> float:
        return 2 * (self.n - 1) / (self.n - 2)

    @property
    def volume_power(self) -> float:
        return 2 * self.n / (self.n - 2)

    @property
    def flat_area(self) -> float:
        return omega(self.n - 1) * self.r ** (self.n - 1)

    @property
    def flat_volume(self) -> float:
        return omega(self.n - 1) * self.r**self.n / self.n

    @property
    def area_prefactor(self) -> float:
        return self.flat_area * self.P**self.area_power

    @property
    def volume_prefactor(self) -> float:
        return self.flat_volume * self.P**self.volume_power


class ExpansionValue(NamedTuple):
    value: float
    leading: float
    second: float
    fourth: float
    remainder_order: int


def _expansion(prefactor, c2, c4, n) -> ExpansionValue:
    lead, sec, four = prefactor, prefactor * c2, prefactor * c4
    return ExpansionValue(lead + sec + four, lead, sec, four, 2 * n + 1)


def area_coefficients(ball: OffCenterBall, perturbed: bool = False) -> tuple[float, float]:
    """Relative second- and fourth-order coefficients of the area bracket."""
    n, r, a = ball.n, ball.r, ball.a_mag
    c2 = (n - 1) * r**2 / a ** (2 * n - 2) / ball.P**2
    if perturbed:
        k4 = n * (n - 1) ** 2 * (3 * n * n - 6 * n + 7) / (2 * (n + 2) * (n + 1) ** 2)
    else:
        k4 = n * (n - 1) ** 2 / (2 * (n + 2))
    return c2, k4 * r**4 / a ** (2 * n)


def volume_coefficients(ball: OffCenterBall, perturbed: bool = False) -> tuple[float, float]:
    """Relative second- and fourth-order coefficients of the volume bracket."""
    n, r, a = ball.n, ball.r, ball.a_mag
    c2 = n * r**2 / a ** (2 * n - 2) / ball.P**2
    if perturbed:
        k4 = n * (n - 1) * (3 * n**4 + 6 * n**3 - 13 * n**2 + 24 * n - 8) / (2 * (n + 2) * (n + 4) * (n + 1) ** 2)
    else:
        k4 = n * n * (n - 1) / (2 * (n + 4))
    return c2, k4 * r**4 / a ** (2 * n)


def area_expansion(ball: OffCenterBall) -> ExpansionValue:
    return _expansion(ball.area_prefactor, *area_coefficients(ball), ball.n)


def volume_expansion(ball: OffCenterBall) -> ExpansionValue:
    return _expansion(ball.volume_prefactor, *volume_coefficients(ball), ball.n)


def perturbed_area_expansion(ball: OffCenterBall) -> ExpansionValue:
    return _expansion(ball.area_prefactor, *area_coefficients(ball, perturbed=True), ball.n)


def perturbed_volume_expansion(ball: OffCenterBall) -> ExpansionValue:
    return _expansion(ball.volume_prefactor, *volume_coefficients(ball, perturbed=True), ball.n)


def _potential_excess(n, a, rho, x):
    """``|y + a|^{2-n} - |a|^{2-n}`` for ``|y| = rho``, without cancellation."""
    t = (2 * a * rho * x + rho * rho) / (a * a)
    return a ** (2 - n) * np.expm1((2 - n) / 2 * np.log1p(t))


def _relative_factor(ball, rho, x, power):
    """``(phi / P)^power - 1``."""
    w = _potential_excess(ball.n, ball.a_mag, rho, x)
    return np.expm1(power * np.log1p(w / ball.P))


def _area_excess(ball, nodes):
    x, w = sphere_rule(ball.n, nodes)
    return float(np.sum(w * _relative_factor(ball, ball.r, x, ball.area_power))) / omega(ball.n - 1)


def _volume_excess(ball, nodes):
    n = ball.n
    x, w = sphere_rule(n, nodes)
    rho, wr = gauss_legendre(nodes, 0.0, ball.r)
    rel = _relative_factor(ball, rho[:, None], x[None, :], ball.volume_power)
    total = float(np.sum(wr * rho ** (n - 1) * (rel @ w)))
    return total / (omega(n - 1) * ball.r**n / n)


class Audited(NamedTuple):
    value: float
    change: float
    nodes: int


def _audit(fun, nodes, scale, rtol=AUDIT_RTOL):
    """Double the node count until the value moves by at most ``rtol * scale``."""
    v = fun(nodes)
    while True:
        v2 = fun(2 * nodes)
        change = abs(v2 - v)
        if change <= rtol * scale:
            return Audited(v2, change, 2 * nodes)
        nodes *= 2
        if 2 * nodes > MAX_NODES:
            raise NumericError(f"quadrature not converged at {2 * nodes} nodes: last change {change:.3g}")
        v = v2


def area_excess(ball: OffCenterBall, nodes: int = DEFAULT_NODES) -> Audited:
    """``area / (omega r^{n-1} P^{2(n-1)/(n-2)}) - 1`` with its node-doubling change."""
    return _audit(lambda N: _area_excess(ball, N), nodes, 1.0)


def volume_excess(ball: OffCenterBall, nodes: int = DEFAULT_NODES) -> Audited:
    """``volume / (omega r^n / n P^{2n/(n-2)}) - 1`` with its node-doubling change."""
    return _audit(lambda N: _volume_excess(ball, N), nodes, 1.0)


def area_exact(ball: OffCenterBall, nodes: int = DEFAULT_NODES, conformal: bool = True) -> float:
    """Area of ``|y| = r`` by Gauss-Jacobi quadrature in the polar angle.

    With ``conformal=False`` the conformal factor is replaced by 1, which
    must reproduce the flat sphere area.
    """
    if not conformal:
        x, w = sphere_rule(ball.n, nodes)
        return float(np.sum(w)) * ball.r ** (ball.n - 1)
    return ball.area_prefactor * (1.0 + area_excess(ball, nodes).value)


def volume_exact(ball: OffCenterBall, nodes: int = DEFAULT_NODES, conformal: bool = True) -> float:
    """Volume of ``|y| <= r`` by Gauss-Legendre in radius times Gauss-Jacobi in angle."""
    if not conformal:
        n = ball.n
        x, w = sphere_rule(n, nodes)
        rho, wr = gauss_legendre(nodes, 0.0, ball.r)
        return float(np.sum(wr * rho ** (n - 1))) * float(np.sum(w))
    return ball.volume_prefactor * (1.0 + volume_excess(ball, nodes).value)


def _sphere_fields(ball, x):
    """Conformal data on ``|y| = r`` at angle cosines ``x``."""
    n, r, a = ball.n, ball.r, ball.a_mag
    R2 = r * r + a * a + 2 * a * r * x
    R = np.sqrt(R2)
    phi = ball.P + _potential_excess(n, a, r, x)
    zn = r + a * x  # <y + a, y/r>
    return R, phi, zn


def _mean_curvature_exact(ball, x):
    n, r = ball.n, ball.r
    R, phi, zn = _sphere_fields(ball, x)
    return (n - 1) / r * phi ** (-2 / (n - 2)) * (1.0 - 2.0 * R ** (-n) * r * zn / phi)


def mean_curvature_offcenter(ball: OffCenterBall, cos_angle):
    """``(lemma_value, exact_value)`` of the mean curvature of ``|y| = r``.

    The exact value is the conformal-change formula
    ``((n-1)/r) phi^{-2/(n-2)} [1 + (2/(n-2)) y . grad log phi]``; the lemma
    value keeps terms through order ``|a|^{-n}``.
    """
    x = np.asarray(cos_angle, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ParameterError("cos_angle must lie in [-1, 1]")
    n, r, a = ball.n, ball.r, ball.a_mag
    quad = a * a * r * r * (1 - n * x * x) / a ** (n + 2)
    lemma = (n - 1) / r * (ball.P ** (-2 / (n - 2)) - quad)
    exact = _mean_curvature_exact(ball, x)
    if x.ndim == 0:
        return float(lemma), float(exact)
    return lemma, exact


def normal_ricci(ball: OffCenterBall, cos_angle):
    """``Ric(nu, nu)`` of the conformal metric on ``|y| = r`` for the unit normal ``nu``."""
    n = ball.n
    x = np.asarray(cos_angle, dtype=float)
    R, phi, zn = _sphere_fields(ball, x)
    # w = (2/(n-2)) log phi, with phi harmonic
    hess_nn = -2 * R ** (-n) * (1 - n * zn * zn / (R * R)) / phi - 2 * (n - 2) * R ** (-2 * n) * zn * zn / phi**2
    grad_n2 = 4 * R ** (-2 * n) * zn * zn / phi**2
    trace_part = 2 * (n - 2) * R ** (2 - 2 * n) / phi**2  # Laplacian w + (n-2)|grad w|^2
    ric_flat = -(n - 2) * (hess_nn - grad_n2) - trace_part
    return phi ** (-4 / (n - 2)) * ric_flat


@dataclass(frozen=True, eq=False)
class PerturbationProfile:
    """Normal perturbation ``f = C (1 - n x^2) + c`` of ``|y| = r``.

    ``C = (n-1) r^3 / ((n+1) |a|^n)``; ``c`` makes the mean of ``f`` vanish
    in the conformal area measure.
    """

    ball: OffCenterBall
    amplitude: float
    c: float
    max_abs: float
    laplacian_residual: float
    nodes: int

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * (1 - self.ball.n * x * x) + self.c

    def dtheta(self, x):
        """``d f / d theta`` at ``x = cos theta`` (upper half, ``sin theta >= 0``)."""
        x = np.asarray(x, dtype=float)
        return 2 * self.ball.n * self.amplitude * x * np.sqrt(1 - x * x)


def perturbation_profile(ball: OffCenterBall, nodes: int = DEFAULT_NODES) -> PerturbationProfile:
    """Build the perturbation and audit the spectral identity of its Laplacian.

    ``laplacian_residual`` is the max over nodes of
    ``Delta f + 2n(n-1)/((n+1) r) (|a|^2 r^2 - n <a,y>^2)/|a|^{n+2}``
    with the Laplacian of the induced conformal metric.
    """
    n, r, a = ball.n, ball.r, ball.a_mag
    C = (n - 1) * r**3 / ((n + 1) * a**n)
    x, w = sphere_rule(n, nodes)
    q = C * (1 - n * x * x)
    rel = _relative_factor(ball, r, x, ball.area_power)
    # the flat mean of q is exactly zero, so only the conformal correction survives
    c = -float(np.sum(w * q * rel)) / float(np.sum(w * (1 + rel)))
    f = q + c

    R, phi, _ = _sphere_fields(ball, x)
    sin = np.sqrt(1 - x * x)
    dv = 2 * a * r * sin * R ** (-n) / phi
    df = 2 * n * C * x * sin
    lap_flat = -(2 * n / r**2) * C * (1 - n * x * x)
    lap = phi ** (-4 / (n - 2)) * (lap_flat + (n - 3) * dv * df / r**2)
    resid = float(np.max(np.abs(lap + (2 * n / r**2) * C * (1 - n * x * x))))
    return PerturbationProfile(ball, C, c, float(np.max(np.abs(f))), resid, nodes)


class PerturbedResult(NamedTuple):
    area: float
    volume: float
    area_excess: float
    volume_excess: float
    area_change: float
    volume_change: float
    mean_f: float


def perturbed_area_volume(ball: OffCenterBall, nodes: int = DEFAULT_NODES, scale: float = 1.0) -> PerturbedResult:
    """Area and volume of the region bounded by the normal graph of ``scale * f``.

    Uses the second-variation formulas
    ``A + int H f + 1/2 int (|grad f|^2 + (H^2 - |II|^2 - Ric(nu,nu)) f^2)``
    and ``V + int f + 1/2 int H f^2`` with exact ``H``, ``|II|^2 = H^2/(n-1)``
    (the coordinate sphere is umbilic) and ``Ric(nu, nu)``.
    """
    n, r = ball.n, ball.r
    prof = perturbation_profile(ball, nodes)
    x, w = sphere_rule(n, nodes)
    _, phi, _ = _sphere_fields(ball, x)
    mu = w * r ** (n - 1) * phi**ball.area_power
    f = scale * prof(x)
    df = scale * prof.dtheta(x)
    H = _mean_curvature_exact(ball, x)
    II2 = H * H / (n - 1)
    ric = normal_ricci(ball, x)
    grad2 = phi ** (-4 / (n - 2)) * df * df / r**2
    dA = float(np.sum(mu * H * f)) + 0.5 * float(np.sum(mu * (grad2 + (H * H - II2 - ric) * f * f)))
    dV = float(np.sum(mu * f)) + 0.5 * float(np.sum(mu * H * f * f))
    eA = area_excess(ball, nodes).value + dA / ball.area_prefactor
    eV = volume_excess(ball, nodes).value + dV / ball.volume_prefactor
    return PerturbedResult(
        area=ball.area_prefactor * (1 + eA),
        volume=ball.volume_prefactor * (1 + eV),
        area_excess=eA,
        volume_excess=eV,
        area_change=dA,
        volume_change=dV,
        mean_f=float(np.sum(mu * f)) / float(np.sum(mu)),
    )


def iso_ratio_coefficient(n: int) -> float:
    """Limit of ``delta |a|^{2n} / r^4``: ``2(n-2)(n-1)^2 / ((n+1)(n+2)(n+4))``."""
    return 2 * (n - 2) * (n - 1) ** 2 / ((n + 1) * (n + 2) * (n + 4))


def _deficit(eA, eV, n):
    # ratio = (1 + eA) / (1 + eV)^{(n-1)/n}; the prefactors cancel exactly
    return -math.expm1(math.log1p(eA) - (n - 1) / n * math.log1p(eV))


def iso_ratio_deficit(ball: OffCenterBall, perturbed: bool = True, nodes: int = DEFAULT_NODES) -> float:
    """``delta`` with ``area = (n^{n-1} omega)^{1/n} vol^{(n-1)/n} (1 - delta)``."""
    if perturbed:
        res = perturbed_area_volume(ball, nodes)
        return _deficit(res.area_excess, res.volume_excess, ball.n)
    return _deficit(area_excess(ball, nodes).value, volume_excess(ball, nodes).value, ball.n)


class DeficitFit(NamedTuple):
    coefficient: float
    slope_term: float
    expected: float
    samples: np.ndarray
    a_values: np.ndarray


def fit_deficit_coefficient(n: int, r: float, a_values, nodes: int = DEFAULT_NODES) -> DeficitFit:
    """Fit ``delta |a|^{2n} / r^4 = C + D/|a|`` and report ``C``."""
    a_values = np.asarray(a_values, dtype=float)
    balls = [OffCenterBall(n, r, a) for a in a_values]
    if any(not b.asymptotic for b in balls):
        raise PreconditionError(f"deficit fit needs |a| >= {REGIME_RATIO} r")
    y = np.array([iso_ratio_deficit(b, nodes=nodes) * b.a_mag ** (2 * n) / r**4 for b in balls])
    if a_values.size >= 2:
        D, C = np.polyfit(1.0 / a_values, y, 1)
    else:
        C, D = y[0], 0.0
    return DeficitFit(float(C), float(D), iso_ratio_coefficient(n), y, a_values)


QUANTITIES = (
    "area",
    "volume",
    "area-leading",
    "volume-leading",
    "perturbed-area",
    "perturbed-volume",
    "mean-curvature",
)


def expected_order(n: int, quantity: str) -> int:
    if quantity.endswith("-leading"):
        return 2 * n - 2
    if quantity == "mean-curvature":
        return n + 1
    return 2 * n + 1


def remainder(ball: OffCenterBall, quantity: str, nodes: int = DEFAULT_NODES) -> tuple[float, float]:
    """``(exact - expansion, quadrature noise)`` in units of the relative bracket."""
    if quantity in ("area", "area-leading"):
        e = area_excess(ball, nodes)
        c2, c4 = area_coefficients(ball)
    elif quantity in ("volume", "volume-leading"):
        e = volume_excess(ball, nodes)
        c2, c4 = volume_coefficients(ball)
    elif quantity in ("perturbed-area", "perturbed-volume"):
        res = perturbed_area_volume(ball, nodes)
        res2 = perturbed_area_volume(ball, 2 * nodes)
        if quantity == "perturbed-area":
            v, v2 = res.area_excess, res2.area_excess
            c2, c4 = area_coefficients(ball, perturbed=True)
        else:
            v, v2 = res.volume_excess, res2.volume_excess
            c2, c4 = volume_coefficients(ball, perturbed=True)
        return v2 - c2 - c4, max(abs(v2 - v), _ROUND * abs(v2))
    elif quantity == "mean-curvature":
        x, _ = sphere_rule(ball.n, nodes)
        x = np.concatenate([x, [-1.0, 1.0]])
        lemma, exact = mean_curvature_offcenter(ball, x)
        return float(np.max(np.abs(lemma - exact))), _ROUND * (ball.n - 1) / ball.r
    else:
        raise ParameterError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    noise = max(e.change, _ROUND * abs(e.value))
    if quantity.endswith("-leading"):
        return e.value, noise
    return e.value - c2 - c4, noise


class ConvergenceFit(NamedTuple):
    order: float
    expected: int
    inconclusive: bool
    residuals: np.ndarray
    noise: np.ndarray
    a_values: np.ndarray


def convergence_order(n: int, r: float, a_values, quantity: str = "area", nodes: int = DEFAULT_NODES) -> ConvergenceFit:
    """Log-log fit of ``|exact - expansion|`` against ``|a|``; ``order`` is minus the slope.

    The fit is declared inconclusive (``order`` NaN) when any remainder is
    not above ``NOISE_FACTOR`` times its noise estimate (node-doubling change
    or rounding of the relative bracket, whichever is larger).
    """
    a_values = np.asarray(a_values, dtype=float)
    if a_values.size < 3:
        raise PreconditionError("need at least 3 values of |a|")
    balls = [OffCenterBall(n, r, a) for a in a_values]
    if any(not b.asymptotic for b in balls):
        raise PreconditionError(f"order fit needs |a| >= {REGIME_RATIO} r")
    pairs = [remainder(b, quantity, nodes) for b in balls]
    res = np.array([p[0] for p in pairs])
    noise = np.array([p[1] for p in pairs])
    inconclusive = bool(np.any(np.abs(res) <= NOISE_FACTOR * noise))
    order = math.nan if inconclusive else -loglog_slope(a_values, res)
    return ConvergenceFit(order, expected_order(n, quantity), inconclusive, res, noise, a_values)


class MomentCheck(NamedTuple):
    sphere_linear: float
    ball_linear: float
    sphere_quadratic: float
    ball_quadratic: float
    sphere_quadratic_closed: float
    ball_quadratic_closed: float


def moment_integrals(ball: OffCenterBall, nodes: int = DEFAULT_NODES) -> MomentCheck:
    """Flat integrals of ``w = |y+a|^{2-n} - |a|^{2-n}`` and ``w^2`` over the sphere and ball.

    The linear moments vanish by the mean-value property; the quadratic ones
    are returned next to their two-term closed forms.
    """
    n, r, a = ball.n, ball.r, ball.a_mag
    om = omega(n - 1)
    x, w = sphere_rule(n, nodes)
    rho, wr = gauss_legendre(nodes, 0.0, r)
    ws = _potential_excess(n, a, r, x)
    wb = _potential_excess(n, a, rho[:, None], x[None, :])
    s1 = r ** (n - 1) * float(np.sum(w * ws))
    s2 = r ** (n - 1) * float(np.sum(w * ws * ws))
    b1 = float(np.sum(wr * rho ** (n - 1) * (wb @ w)))
    b2 = float(np.sum(wr * rho ** (n - 1) * ((wb * wb) @ w)))
    k = (n - 2) ** 2
    s2c = k / n * om * r ** (n + 1) / a ** (2 * n - 2) + (n - 1) * k / (2 * (n + 2)) * om * r ** (n + 3) / a ** (2 * n)
    b2c = k / (n * (n + 2)) * om * r ** (n + 2) / a ** (2 * n - 2) + (n - 1) * k / (2 * (n + 2) * (n + 4)) * om * r ** (n + 4) / a ** (2 * n)
    return MomentCheck(s1, b1, s2, b2, s2c, b2c)


@dataclass(frozen=True, eq=False)
class FarBall:
    ball: OffCenterBall
    profile: PerturbationProfile
    volume: float
    area: float
    euclidean_bound: float
    deficit: float


def far_ball_construct(n: int, V: float, exclusion_radius: float = 0.0, rtol: float = 1e-12) -> FarBall:
    """Perturbed off-center ball of volume ``V`` placed beyond ``exclusion_radius``.

    Starts at ``|a| = max(2 * exclusion_radius, 20 r_flat)`` and doubles ``|a|``
    while the ball is outside the asymptotic regime or fails to beat the
    Euclidean bound.
    """
    if not V > 0:
        raise PreconditionError("volume must be positive")
    r_flat = (n * V / omega(n - 1)) ** (1.0 / n)
    a = max(2.0 * exclusion_radius, 20.0 * r_flat)
    while True:
        if not math.isfinite(a) or a > 1e300 ** (1.0 / n):
            raise NumericError("off-center construction overflowed")

        def vol(r):
            return perturbed_area_volume(OffCenterBall(n, r, a)).volume / V - 1.0

        lo, hi = 0.5 * r_flat, 1.5 * r_flat
        while vol(lo) > 0:
            lo *= 0.5
        while vol(hi) < 0 and hi < a / REGIME_RATIO:
            hi *= 1.5
        if vol(hi) < 0:
            a *= 2
            continue
        r = brentq(vol, lo, hi, xtol=1e-15 * r_flat, rtol=4 * np.finfo(float).eps, maxiter=500)
        ball = OffCenterBall(n, r, a)
        res = perturbed_area_volume(ball)
        bound = euclidean_ratio_bound(n, res.volume)
        # the deficit is computed without cancellation, so its sign resolves
        # area < bound even when the two differ below double precision
        delta = _deficit(res.area_excess, res.volume_excess, n)
        if ball.asymptotic and delta > 0 and abs(res.volume / V - 1) <= max(rtol, 1e-8):
            return FarBall(ball, perturbation_profile(ball), res.volume, res.area, bound, delta)
        a *= 2


def regime_check(ball: OffCenterBall) -> bool:
    """Warn when an asymptotic formula is used outside ``|a| >= REGIME_RATIO r``."""
    if not ball.asymptotic:
        warnings.warn(f"|a|/r = {ball.a_mag / ball.r:.3g} is below the asymptotic threshold {REGIME_RATIO}", RegimeWarning, stacklevel=2)
        return False
    return True

"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.special import roots_jacobi, roots_legendre

from .errors import NumericError

DEFAULT_RTOL = 1e-12


def omega(k: int) -> float:
    """Area of the unit k-sphere in R^{k+1}."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


@lru_cache(maxsize=64)
def _legendre(N: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(N)
    return x, w


@lru_cache(maxsize=64)
def _jacobi(N: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    if alpha == 0.0:
        return _legendre(N)
    x, w = roots_jacobi(N, alpha, alpha)
    return x, w


def gauss_legendre(N: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """N-point Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _legendre(N)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def sphere_rule(n: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``x = cos(theta)`` and weights for axisymmetric integrals over S^{n-1}.

    ``sum(w * g(x))`` approximates the integral of ``g(cos theta)`` over the
    unit (n-1)-sphere. Gauss-Jacobi with exponent (n-3)/2 absorbs the
    ``sin^{n-2}`` Jacobian, so smooth integrands converge exponentially for
    every n.
    """
    x, w = _jacobi(N, (n - 3) / 2)
    return x, w * omega(n - 2)


def integrate(fun, a: float, b: float, rtol: float = DEFAULT_RTOL, limit: int = 200) -> float:
    """Adaptive quadrature (QUADPACK) with a relative tolerance."""
    with warnings.catch_warnings():
        # convergence is judged below from the returned error estimate
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(fun, a, b, epsabs=0.0, epsrel=rtol, limit=limit)
    if not np.isfinite(val):
        raise NumericError(f"quadrature on [{a}, {b}] produced {val}")
    if err > max(100 * rtol * abs(val), 1e-300):
        raise NumericError(f"quadrature on [{a}, {b}] did not converge: value={val}, error estimate={err}")
    return val


def loglog_slope(x, y) -> float:
    """Least-squares slope of log|y| against log x."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])

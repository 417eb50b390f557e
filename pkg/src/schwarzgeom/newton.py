"""Elementary symmetric polynomials of principal curvatures and Newton tensors."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import PreconditionError


def elementary_symmetric(lam) -> np.ndarray:
    """All ``sigma_0 .. sigma_k`` of the last axis of ``lam`` (k = lam.shape[-1]).

    Uses the coefficient recurrence of ``prod_j (1 + t lam_j)`` rather than
    subset sums.
    """
    lam = np.asarray(lam, dtype=float)
    k = lam.shape[-1]
    e = np.zeros(lam.shape[:-1] + (k + 1,))
    e[..., 0] = 1.0
    for j in range(k):
        lj = lam[..., j]
        for p in range(j + 1, 0, -1):
            e[..., p] = e[..., p] + lj * e[..., p - 1]
    return e


def sigma_p(lam, p: int):
    """``p``-th elementary symmetric polynomial; ``sigma_0 = 1``."""
    lam = np.asarray(lam, dtype=float)
    k = lam.shape[-1]
    if not 0 <= p <= k:
        raise PreconditionError(f"p must lie in [0, {k}], got {p}")
    out = elementary_symmetric(lam)[..., p]
    return float(out) if out.ndim == 0 else out


def _sigma_or_zero(lam, p: int):
    lam = np.asarray(lam, dtype=float)
    if p < 0 or p > lam.shape[-1]:
        return np.zeros(lam.shape[:-1]) if lam.ndim > 1 else 0.0
    return sigma_p(lam, p)


def complement_sigma(lam, p: int) -> np.ndarray:
    """``sigma_p`` of ``lam`` with entry ``j`` removed, stacked over ``j`` on the last axis."""
    lam = np.asarray(lam, dtype=float)
    k = lam.shape[-1]
    cols = []
    for j in range(k):
        rest = np.delete(lam, j, axis=-1)
        cols.append(np.asarray(_sigma_or_zero(rest, p), dtype=float))
    return np.stack(cols, axis=-1)


class NewtonData(NamedTuple):
    p: int
    sigma: float
    diagonal: np.ndarray


def newton_tensor(lam, p: int) -> NewtonData:
    """Principal-frame diagonal of ``T^(p) = d sigma_p / d h``: ``sigma_{p-1}(lam \\ j)``."""
    lam = np.asarray(lam, dtype=float)
    k = lam.shape[-1]
    if not 1 <= p <= k:
        raise PreconditionError(f"p must lie in [1, {k}], got {p}")
    return NewtonData(p, sigma_p(lam, p), complement_sigma(lam, p - 1))


def _check_n(lam, n):
    if lam.shape[-1] != n - 1:
        raise PreconditionError(f"expected {n - 1} principal curvatures for n={n}, got {lam.shape[-1]}")


def algebraic_identities(lam, p: int, n: int) -> tuple[float, float]:
    """Residuals of ``sum lam_j T_jj = p sigma_p`` and ``sum T_jj = (n-p) sigma_{p-1}``."""
    lam = np.asarray(lam, dtype=float)
    _check_n(lam, n)
    T = newton_tensor(lam, p)
    euler = np.sum(lam * T.diagonal, axis=-1) - p * T.sigma
    trace = np.sum(T.diagonal, axis=-1) - (n - p) * sigma_p(lam, p - 1)
    return euler, trace


def generating_residual(lam, t) -> float:
    """``sum_p t^p sigma_p - det(I + t diag(lam))``, the determinant taken by LU."""
    lam = np.asarray(lam, dtype=float)
    e = elementary_symmetric(lam)
    series = np.polynomial.polynomial.polyval(t, e)
    det = np.linalg.det(np.eye(lam.size) + t * np.diag(lam))
    return float(series - det)


def newton_inequality_margin(lam, p: int, n: int):
    """``(n-p) sigma_{p-1} sigma_1 - (n-1) p sigma_p``; non-negative for ``lam >= 0``."""
    lam = np.asarray(lam, dtype=float)
    _check_n(lam, n)
    if not 1 <= p <= n - 1:
        raise PreconditionError(f"p must lie in [1, {n - 1}], got {p}")
    if np.any(lam < 0):
        raise PreconditionError("Newton inequality margin needs non-negative curvatures")
    e = elementary_symmetric(lam)
    return (n - p) * e[..., p - 1] * e[..., 1] - (n - 1) * p * e[..., p]

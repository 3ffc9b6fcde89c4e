"""The universal bulk limit: sine-kernel determinants and their integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from wignerlab.exceptions import QuadratureError, ValidationError
from wignerlab.observables import Observable

__all__ = [
    "PredictedStatistic",
    "sine_kernel",
    "sine_kernel_determinant",
    "sine_kernel_determinants",
    "predicted_statistic",
    "DEFAULT_TOLERANCES",
]

DEFAULT_TOLERANCES = {1: 1e-8, 2: 1e-8, 3: 1e-6}
_TAYLOR_SWITCH = 1e-6


def sine_kernel(x):
    """``sin(pi x)/(pi x)``, with a Taylor expansion for ``|x| < 1e-6``."""
    x = np.asarray(x, dtype=float)
    y = math.pi * x
    small = np.abs(x) < _TAYLOR_SWITCH
    safe = np.where(small, 1.0, y)
    y2 = y * y
    out = np.where(small, 1.0 - y2 / 6.0 + y2 * y2 / 120.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def sine_kernel_determinants(points) -> np.ndarray:
    """Batched ``det[K(alpha_i - alpha_j)]`` for points of shape ``(n, k)``."""
    a = np.asarray(points, dtype=float)
    K = sine_kernel(a[..., :, None] - a[..., None, :])
    return np.linalg.det(K)


def sine_kernel_determinant(alphas) -> float:
    """Determinant of the k x k matrix ``sine_kernel(alpha_i - alpha_j)`` (LU with partial pivoting).

    >>> round(sine_kernel_determinant([0.0, 0.5]), 5)
    0.59472
    """
    a = np.atleast_1d(np.asarray(alphas, dtype=float))
    if a.ndim != 1 or a.size < 1:
        raise ValidationError("need a nonempty one-dimensional array of points")
    return float(sine_kernel_determinants(a[None, :])[0])


@dataclass(frozen=True)
class PredictedStatistic:
    k: int
    value: float
    error: float


def predicted_statistic(
    O: Observable,
    k: int | None = None,
    tol: float | None = None,
    max_subdivisions: int = 20_000,
) -> PredictedStatistic:
    """Integral of ``O(alpha) det[K(alpha_i - alpha_j)]`` over the support box of ``O``.

    Adaptive cubature with a 21-point Gauss-Kronrod product rule to absolute
    error ``tol``; defaults are 1e-8 for k <= 2 and 1e-6 for k = 3.  (Fully
    symmetric rules are unsuitable: their nodes have coinciding coordinates,
    where the determinant vanishes.)  Raises :class:`QuadratureError` with
    the best estimate when the subdivision budget runs out first.
    """
    k = O.k if k is None else int(k)
    if k != O.k:
        raise ValidationError(f"order k={k} differs from observable arity {O.k}")
    if k not in DEFAULT_TOLERANCES:
        raise ValidationError(f"only k <= 3 is supported, got k={k}")
    tol = DEFAULT_TOLERANCES[k] if tol is None else float(tol)
    lo = np.array([b[0] for b in O.support_box])
    hi = np.array([b[1] for b in O.support_box])

    if k == 1:
        integrand = O
    else:
        def integrand(x):
            return O(x) * sine_kernel_determinants(x)

    res = integrate.cubature(
        integrand, lo, hi,
        rule="gk21",
        rtol=0.0, atol=tol, max_subdivisions=max_subdivisions,
    )
    value, err = float(res.estimate), float(res.error)
    if res.status != "converged" or not err <= tol:
        raise QuadratureError(
            f"quadrature did not reach tol {tol:g}: estimate {value!r}, error {err:.3g}",
            estimate=value, error=err,
        )
    return PredictedStatistic(k, value, err)

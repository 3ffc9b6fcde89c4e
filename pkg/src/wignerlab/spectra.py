"""Eigenvalues, semicircle reference functions and local rescaling at a bulk energy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import stats

from wignerlab.exceptions import EigensolverError, ValidationError

__all__ = [
    "Spectrum",
    "LocalCoordinates",
    "LocalDensityRecord",
    "eigenvalues",
    "semicircle_density",
    "semicircle_cdf",
    "semicircle_count",
    "semicircle_quantiles",
    "rescale_around_energy",
    "local_density_check",
    "ks_distance",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted eigenvalues of one matrix.

    ``residual_bound`` is the largest eigenpair residual ``||Hv - lambda v||``
    when it was measured, otherwise the a priori backward-error bound
    ``N * eps * ||H||_2`` of the Hermitian solver.
    """

    eigenvalues: np.ndarray
    residual_bound: float = 0.0
    measured: bool = False

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        if ev.ndim != 1:
            raise ValidationError("eigenvalues must be one-dimensional")
        if ev.size > 1 and np.any(np.diff(ev) < 0):
            raise ValidationError("eigenvalues must be sorted ascending")
        ev.flags.writeable = False
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def N(self) -> int:
        return self.eigenvalues.size

    def to_csv(self, path, **metadata) -> None:
        """One-column CSV with ``# key=value`` header lines (``N`` always included)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# N={self.N}\n")
            for key, value in metadata.items():
                fh.write(f"# {key}={value}\n")
            fh.write("eigenvalue\n")
            for x in self.eigenvalues:
                fh.write(f"{float(x)!r}\n")

    @classmethod
    def from_csv(cls, path) -> tuple[Spectrum, dict]:
        meta, values = {}, []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key] = value
                elif line and line != "eigenvalue":
                    values.append(float(line))
        return cls(np.array(values)), meta


def eigenvalues(H, tol: float = DEFAULT_TOL, check_residual: bool = False) -> Spectrum:
    """All eigenvalues of a Hermitian matrix, ascending.

    Only eigenvalues are computed by default.  With ``check_residual`` the
    eigenvectors are formed too and the largest residual is compared with
    ``tol * ||H||_2``.
    """
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {H.shape}")
    N = H.shape[0]
    try:
        if check_residual:
            w, v = scipy.linalg.eigh(H, check_finite=False)
        else:
            w = scipy.linalg.eigvalsh(H, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigensolverError(f"Hermitian eigensolver failed for N={N}: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise EigensolverError(f"Hermitian eigensolver returned non-finite values for N={N}")
    norm = float(np.max(np.abs(w))) if N else 0.0
    if check_residual:
        res = float(np.max(np.linalg.norm(H @ v - v * w, axis=0))) if N else 0.0
        if res > tol * max(norm, np.finfo(float).tiny):
            raise EigensolverError(f"eigenpair residual {res:.3g} exceeds {tol:g} * ||H|| = {tol * norm:.3g}")
        return Spectrum(w, res, True)
    return Spectrum(w, N * np.finfo(float).eps * norm, False)


def semicircle_density(E):
    """Semicircle density ``sqrt(4 - E^2) / (2 pi)`` on ``[-2, 2]``, zero outside."""
    E = np.asarray(E, dtype=float)
    out = np.sqrt(np.clip(4.0 - E * E, 0.0, None)) / (2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def semicircle_cdf(x):
    """Semicircle distribution function, ``x sqrt(4 - x^2)/(4 pi) + arcsin(x/2)/pi + 1/2``."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = x * np.sqrt(4.0 - x * x) / (4.0 * math.pi) + np.arcsin(x / 2.0) / math.pi + 0.5
    return float(out) if out.ndim == 0 else out


def semicircle_count(E1: float, E2: float) -> float:
    """Semicircle mass of ``[E1, E2]``."""
    if E1 > E2:
        raise ValidationError(f"need E1 <= E2, got ({E1}, {E2})")
    return semicircle_cdf(E2) - semicircle_cdf(E1)


def semicircle_quantiles(N: int) -> np.ndarray:
    """Points ``gamma_i`` with ``semicircle_cdf(gamma_i) = (i - 1/2)/N``, i = 1..N."""
    from scipy.optimize import brentq

    targets = (np.arange(1, N + 1) - 0.5) / N
    return np.array([brentq(lambda x, t=t: semicircle_cdf(x) - t, -2.0, 2.0, xtol=1e-15) for t in targets])


@dataclass(frozen=True, eq=False)
class LocalCoordinates:
    """Eigenvalues rescaled to unit mean spacing around a bulk energy."""

    energy: float
    density: float
    alphas: np.ndarray
    N: int


def rescale_around_energy(spec: Spectrum, E: float) -> LocalCoordinates:
    """Map eigenvalues to ``alpha_i = N rho(E) (lambda_i - E)``."""
    if not abs(E) < 2.0:
        raise ValidationError(f"energy must lie in the bulk |E| < 2, got {E}")
    rho = semicircle_density(E)
    alphas = spec.N * rho * (spec.eigenvalues - E)
    alphas.flags.writeable = False
    return LocalCoordinates(float(E), rho, alphas, spec.N)


@dataclass(frozen=True)
class LocalDensityRecord:
    energy: float
    eta: float
    empirical_count: int
    predicted_count: float
    relative_deviation: float


def local_density_check(spec: Spectrum, E: float, eta: float) -> LocalDensityRecord:
    """Count eigenvalues in ``[E - eta, E + eta]`` against ``N * semicircle_count``."""
    if not abs(E) < 2.0:
        raise ValidationError(f"energy must lie in the bulk |E| < 2, got {E}")
    if not eta > 0:
        raise ValidationError(f"window half-width must be positive, got {eta}")
    ev = spec.eigenvalues
    count = int(np.searchsorted(ev, E + eta, side="right") - np.searchsorted(ev, E - eta, side="left"))
    predicted = spec.N * semicircle_count(E - eta, E + eta)
    rel = abs(count - predicted) / predicted if predicted > 0 else math.inf
    return LocalDensityRecord(float(E), float(eta), count, predicted, rel)


def ks_distance(spec: Spectrum) -> float:
    """Kolmogorov-Smirnov distance between the empirical spectral CDF and the semicircle CDF."""
    return float(stats.kstest(spec.eigenvalues, semicircle_cdf).statistic)

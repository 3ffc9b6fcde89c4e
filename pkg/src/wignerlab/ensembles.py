"""Hermitian Wigner-type ensembles: entry laws, variance profiles and samplers.

Conventions
-----------
Every entry law is described by two *standardized* real marginals ``X`` and
``Y`` (mean 0, variance 1), drawn independently.  An off-diagonal entry is

    h_ij = sigma_ij * (X + iY) / sqrt(2),      i < j,

so that ``E|h_ij|^2 = sigma_ij^2``, and a diagonal entry is the real number
``h_ii = sigma_ii * X``.  The lower triangle is filled by conjugation, which
makes every sampled matrix Hermitian bit for bit.

Randomness comes from :class:`SeedSpec`, which maps ``(master, stream, path)``
to a counter-based Philox generator keyed through :class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from wignerlab.exceptions import ProfileError, ValidationError

__all__ = [
    "SeedSpec",
    "EntryDistribution",
    "VarianceProfile",
    "ProfileCheck",
    "EnsembleSpec",
    "check_profile",
    "make_variance_profile",
    "sample_matrix",
    "sample_gue",
    "gaussian_divisible",
    "interpolation_time",
]

ENTRY_KINDS = ("complex-gaussian", "four-point-bernoulli", "atomic", "heavy-tailed")
PROFILE_KINDS = ("flat", "circulant-band", "explicit")

_ATOM_TOL = 1e-12
_ROW_SUM_TOL = 1e-10


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeedSpec:
    """Address of one reproducible random stream.

    The generator for ``SeedSpec(master, stream, path)`` is::

        Generator(Philox(SeedSequence(master, spawn_key=(stream, *path))))

    Distinct addresses give statistically independent streams, and the
    mapping depends on nothing but the three fields, so results do not depend
    on the order in which samples are evaluated.
    """

    master: int
    stream: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master) < 2**64:
            raise ValidationError(f"master seed must be a 64-bit unsigned integer, got {self.master}")
        if int(self.stream) < 0 or any(int(p) < 0 for p in self.path):
            raise ValidationError("stream index and path entries must be nonnegative")
        object.__setattr__(self, "path", tuple(int(p) for p in self.path))

    def child(self, *index: int) -> SeedSpec:
        """Substream addressed by appending ``index`` to the path."""
        return replace(self, path=self.path + tuple(int(i) for i in index))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master), spawn_key=(int(self.stream), *self.path))
        return np.random.Generator(np.random.Philox(seq))


# ---------------------------------------------------------------------------
# entry distributions
# ---------------------------------------------------------------------------


def _as_tuple(values) -> tuple[float, ...] | None:
    if values is None:
        return None
    return tuple(float(v) for v in np.ravel(values))


def _check_atomic_marginal(atoms, probs, name):
    if atoms is None or probs is None:
        raise ValidationError(f"atomic law needs atoms and probabilities for the {name} part")
    x = np.asarray(atoms, dtype=float)
    p = np.asarray(probs, dtype=float)
    if x.shape != p.shape or x.size == 0:
        raise ValidationError(f"{name} atoms and probabilities must be nonempty and of equal length")
    if np.any(p < 0):
        raise ValidationError(f"{name} probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > _ATOM_TOL:
        raise ValidationError(f"{name} probabilities sum to {p.sum():.16g}, not 1")
    mean = float(p @ x)
    var = float(p @ x**2)
    if abs(mean) > _ATOM_TOL:
        raise ValidationError(f"{name} marginal has mean {mean:.3g}; entries must be centered")
    if abs(var - 1.0) > _ATOM_TOL:
        raise ValidationError(f"{name} marginal has variance {var:.16g}; standardized marginals need 1")


@dataclass(frozen=True)
class EntryDistribution:
    """Law of a standardized complex entry ``v = (X + iY)/sqrt(2)``.

    ``X`` and ``Y`` are independent, centered, with unit variance, so that
    ``E v = 0`` and ``E|v|^2 = 1``.  Atomic laws list the atoms of ``X`` and
    ``Y`` in these standardized units.  The heavy-tailed law is a symmetrized
    Pareto variable with tail index ``gamma`` (density proportional to
    ``|x|^(-1-gamma)`` beyond ``pareto_scale``), which has finite absolute
    moments exactly below ``gamma``.
    """

    kind: str
    re_atoms: tuple[float, ...] | None = None
    re_probs: tuple[float, ...] | None = None
    im_atoms: tuple[float, ...] | None = None
    im_probs: tuple[float, ...] | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ENTRY_KINDS:
            raise ValidationError(f"unknown entry kind {self.kind!r}; expected one of {ENTRY_KINDS}")
        for name in ("re_atoms", "re_probs", "im_atoms", "im_probs"):
            object.__setattr__(self, name, _as_tuple(getattr(self, name)))
        if self.kind == "atomic":
            _check_atomic_marginal(self.re_atoms, self.re_probs, "real")
            _check_atomic_marginal(self.im_atoms, self.im_probs, "imaginary")
        if self.kind == "heavy-tailed":
            if self.gamma is None or not float(self.gamma) > 4.0:
                raise ValidationError(f"heavy-tailed entries need tail index gamma > 4, got {self.gamma}")
            object.__setattr__(self, "gamma", float(self.gamma))

    # constructors -----------------------------------------------------------

    @classmethod
    def gaussian(cls) -> EntryDistribution:
        return cls("complex-gaussian")

    @classmethod
    def bernoulli(cls) -> EntryDistribution:
        """Uniform law on the four points ``(+-1 +- i)/sqrt(2)``."""
        return cls("four-point-bernoulli")

    @classmethod
    def atomic(cls, re_atoms, re_probs, im_atoms=None, im_probs=None) -> EntryDistribution:
        """Atomic law; the imaginary marginal defaults to a copy of the real one."""
        if im_atoms is None:
            im_atoms, im_probs = re_atoms, re_probs
        return cls("atomic", re_atoms, re_probs, im_atoms, im_probs)

    @classmethod
    def heavy_tailed(cls, gamma: float) -> EntryDistribution:
        return cls("heavy-tailed", gamma=gamma)

    # properties -------------------------------------------------------------

    @property
    def pareto_scale(self) -> float:
        """Lower cutoff ``x_m`` of the Pareto magnitude, fixed by unit variance."""
        return math.sqrt((self.gamma - 2.0) / self.gamma)

    @property
    def is_symmetric(self) -> bool:
        """True when both marginals are invariant under ``x -> -x``."""
        if self.kind != "atomic":
            return True
        for atoms, probs in ((self.re_atoms, self.re_probs), (self.im_atoms, self.im_probs)):
            fwd = sorted(zip(atoms, probs))
            rev = sorted((-x, p) for x, p in zip(atoms, probs))
            if not np.allclose(fwd, rev, rtol=0, atol=1e-14):
                return False
        return True

    def marginal_moment(self, r: int, component: str = "re") -> float:
        """Exact ``E X^r`` for the standardized real (``"re"``) or imaginary marginal.

        Returns ``inf`` for even orders at or above the heavy-tail index.
        """
        r = int(r)
        if r < 0:
            raise ValidationError("moment order must be nonnegative")
        if r == 0:
            return 1.0
        if self.kind == "complex-gaussian":
            return 0.0 if r % 2 else float(math.prod(range(r - 1, 0, -2)))
        if self.kind == "four-point-bernoulli":
            return 0.0 if r % 2 else 1.0
        if self.kind == "atomic":
            atoms, probs = (
                (self.re_atoms, self.re_probs) if component == "re" else (self.im_atoms, self.im_probs)
            )
            return math.fsum(p * x**r for x, p in zip(atoms, probs))
        if r % 2:
            return 0.0
        if r >= self.gamma:
            return math.inf
        return self.pareto_scale**r * self.gamma / (self.gamma - r)

    # sampling ---------------------------------------------------------------

    def _sample_marginal(self, rng, shape, component):
        if self.kind == "complex-gaussian":
            return rng.standard_normal(shape)
        if self.kind == "four-point-bernoulli":
            return 2.0 * rng.integers(0, 2, size=shape) - 1.0
        if self.kind == "atomic":
            atoms, probs = (
                (self.re_atoms, self.re_probs) if component == "re" else (self.im_atoms, self.im_probs)
            )
            idx = np.searchsorted(np.cumsum(probs)[:-1], rng.random(shape), side="right")
            return np.asarray(atoms)[idx]
        # 1 - U lies in (0, 1], so the magnitude is finite
        magnitude = self.pareto_scale * (1.0 - rng.random(shape)) ** (-1.0 / self.gamma)
        sign = 2.0 * rng.integers(0, 2, size=shape) - 1.0
        return sign * magnitude

    def sample_components(self, rng: np.random.Generator, shape) -> tuple[np.ndarray, np.ndarray]:
        """Draw independent standardized ``(X, Y)`` arrays of the given shape."""
        return self._sample_marginal(rng, shape, "re"), self._sample_marginal(rng, shape, "im")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Draw complex entries ``v = (X + iY)/sqrt(2)``."""
        x, y = self.sample_components(rng, shape)
        return (x + 1j * y) / math.sqrt(2.0)

    # serialization ----------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "atomic":
            out.update(
                re_atoms=list(self.re_atoms),
                re_probs=list(self.re_probs),
                im_atoms=list(self.im_atoms),
                im_probs=list(self.im_probs),
            )
        if self.kind == "heavy-tailed":
            out["gamma"] = self.gamma
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EntryDistribution:
        kind = data.get("kind")
        if kind == "atomic":
            return cls.atomic(
                data["re_atoms"], data["re_probs"], data.get("im_atoms"), data.get("im_probs")
            )
        if kind == "heavy-tailed":
            return cls.heavy_tailed(data.get("gamma"))
        return cls(kind)


# ---------------------------------------------------------------------------
# variance profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileCheck:
    """Outcome of an exhaustive scan of a variance profile."""

    N: int
    symmetric: bool
    max_row_sum_error: float
    min_scaled: float
    max_scaled: float
    delta: float
    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def check_profile(variances, delta: float, row_sum_tol: float = _ROW_SUM_TOL) -> ProfileCheck:
    """Scan every entry of a variance array against the generalized-Wigner constraints.

    Checks ``sigma_ij^2 == sigma_ji^2``, ``|sum_j sigma_ij^2 - 1| <= row_sum_tol``
    and ``delta < N sigma_ij^2 < 1/delta`` for all ``i, j``.
    """
    s = np.asarray(variances, dtype=float)
    violations = []
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] == 0:
        raise ProfileError(f"variance profile must be a nonempty square array, got shape {s.shape}")
    N = s.shape[0]
    symmetric = bool(np.array_equal(s, s.T))
    if not symmetric:
        violations.append("symmetry sigma_ij^2 == sigma_ji^2")
    row_err = float(np.max(np.abs(s.sum(axis=1) - 1.0)))
    if not row_err <= row_sum_tol:
        violations.append(f"row sums sum_j sigma_ij^2 == 1 (max error {row_err:.3g} > {row_sum_tol:g})")
    scaled = N * s
    lo, hi = float(scaled.min()), float(scaled.max())
    if not delta > 0:
        violations.append(f"profile bound delta > 0 (delta = {delta})")
    else:
        if not lo > delta:
            violations.append(f"lower bound delta < N sigma_ij^2 (min {lo:.6g} <= delta {delta:.6g})")
        if not hi < 1.0 / delta:
            violations.append(f"upper bound N sigma_ij^2 < 1/delta (max {hi:.6g} >= {1.0 / delta:.6g})")
    return ProfileCheck(N, symmetric, row_err, lo, hi, float(delta), tuple(violations))


def _auto_delta(variances, margin):
    scaled = variances.shape[0] * variances
    lo, hi = float(scaled.min()), float(scaled.max())
    if lo <= 0:
        raise ProfileError(f"N sigma_ij^2 > 0 violated (min N sigma_ij^2 = {lo:.6g})")
    return min(lo, 1.0 / hi) * (1.0 - margin)


@dataclass(frozen=True, eq=False)
class VarianceProfile:
    """Array of entry variances ``sigma_ij^2`` together with its bound ``delta``.

    Construction validates the profile and raises :class:`ProfileError` on any
    violation; profiles are never repaired.  ``kind`` and ``params`` record
    how the profile was built so it can be serialized compactly.
    """

    variances: np.ndarray
    delta: float
    kind: str = "explicit"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.variances, dtype=float)
        s.flags.writeable = False
        object.__setattr__(self, "variances", s)
        report = check_profile(s, self.delta)
        if not report.valid:
            raise ProfileError("invalid variance profile: " + "; ".join(report.violations))

    @property
    def N(self) -> int:
        return self.variances.shape[0]

    def check(self) -> ProfileCheck:
        return check_profile(self.variances, self.delta)

    @classmethod
    def from_variances(cls, variances, delta: float | None = None, margin: float = 1e-3):
        """Wrap a user-supplied array; ``delta`` defaults to the tightest valid bound less a margin."""
        s = np.asarray(variances, dtype=float)
        if delta is None:
            delta = _auto_delta(s, margin)
        return cls(s, float(delta), "explicit", {})

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "explicit":
            return {"kind": "explicit", "variances": self.variances.tolist(), "delta": self.delta}
        return {"kind": self.kind, **self.params}


def make_variance_profile(
    kind: str,
    N: int,
    width: int | None = None,
    contrast: float | None = None,
    margin: float = 1e-3,
) -> VarianceProfile:
    """Build a flat or circulant-band variance profile with unit row sums.

    The circulant-band profile has ``sigma_ij^2 = f((i - j) mod N)`` where
    ``f(k)`` is ``(1 + contrast)/N`` when the circular distance
    ``min(k, N - k)`` is at most ``width`` and a constant chosen so that
    ``sum_k f(k) = 1`` otherwise.  Because every row is a cyclic shift of
    ``f``, every row sum is the same number.

    ``delta`` is recorded as ``min(N sigma^2, 1/(N sigma^2))`` over the profile,
    shrunk by the relative ``margin``.

    Examples
    --------
    >>> make_variance_profile("flat", 5).variances[0, 0]
    0.2
    """
    N = int(N)
    if N < 1:
        raise ValidationError(f"dimension N must be >= 1, got {N}")
    if not 0 < margin < 1:
        raise ValidationError("margin must lie in (0, 1)")
    if kind == "flat":
        s = np.full((N, N), 1.0 / N)
        return VarianceProfile(s, _auto_delta(s, margin), "flat", {})
    if kind != "circulant-band":
        raise ValidationError(f"unknown profile kind {kind!r}; expected 'flat' or 'circulant-band'")
    if width is None or contrast is None:
        raise ValidationError("circulant-band profile needs width and contrast")
    width, contrast = int(width), float(contrast)
    if not 0 <= contrast < 1:
        raise ValidationError(f"contrast must satisfy 0 <= c < 1, got {contrast}")
    if not 1 <= width <= N / 2:
        raise ValidationError(f"band half-width must satisfy 1 <= w <= N/2, got w={width}, N={N}")

    k = np.arange(N)
    dist = np.minimum(k, N - k)
    inside = dist <= width
    n_in = int(inside.sum())
    f_in = (1.0 + contrast) / N
    if n_in == N:
        if contrast != 0:
            raise ProfileError(
                f"row sums sum_j sigma_ij^2 == 1 impossible: band covers all {N} entries, sum = 1 + c"
            )
        f = np.full(N, 1.0 / N)
    else:
        f_out = (1.0 - n_in * f_in) / (N - n_in)
        if not f_out > 0:
            raise ProfileError(
                f"N sigma_ij^2 > 0 violated outside the band: N f_out = {N * f_out:.6g} "
                f"(need (2w+1)(1+c) < N)"
            )
        f = np.where(inside, f_in, f_out)
    s = f[(k[None, :] - k[:, None]) % N]
    return VarianceProfile(s, _auto_delta(s, margin), "circulant-band", {"width": width, "contrast": contrast})


def _profile_from_dict(data: dict[str, Any], N: int) -> VarianceProfile:
    kind = data.get("kind", "flat")
    if kind == "explicit":
        return VarianceProfile.from_variances(data["variances"], data.get("delta"))
    return make_variance_profile(kind, N, data.get("width"), data.get("contrast"))


# ---------------------------------------------------------------------------
# ensembles and sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    """Dimension, entry law and variance profile of a Hermitian ensemble.

    A missing profile means the flat profile ``sigma_ij^2 = 1/N``.
    """

    N: int
    entry: EntryDistribution = field(default_factory=EntryDistribution.gaussian)
    profile: VarianceProfile | None = None
    label: str = ""

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValidationError(f"dimension N must be >= 1, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        if self.profile is None:
            object.__setattr__(self, "profile", make_variance_profile("flat", self.N))
        if self.profile.N != self.N:
            raise ValidationError(f"profile dimension {self.profile.N} differs from N = {self.N}")
        if not self.label:
            object.__setattr__(self, "label", f"{self.entry.kind}/{self.profile.kind}/N={self.N}")

    @classmethod
    def gue(cls, N: int, label: str = "") -> EnsembleSpec:
        return cls(N, EntryDistribution.gaussian(), None, label or f"GUE/N={N}")

    def with_N(self, N: int) -> EnsembleSpec:
        """Same entry law and profile recipe at another dimension."""
        if self.profile.kind == "explicit":
            raise ValidationError("explicit profiles cannot be resized")
        return EnsembleSpec(N, self.entry, _profile_from_dict(self.profile.to_dict(), N))

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "label": self.label,
            "entry": self.entry.to_dict(),
            "profile": self.profile.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EnsembleSpec:
        N = int(data["N"])
        entry = EntryDistribution.from_dict(data.get("entry", {"kind": "complex-gaussian"}))
        profile = _profile_from_dict(data.get("profile", {"kind": "flat"}), N)
        return cls(N, entry, profile, data.get("label", ""))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> EnsembleSpec:
        return cls.from_dict(json.loads(text))


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def sample_matrix(spec: EnsembleSpec, seed: SeedSpec) -> np.ndarray:
    """Draw one Hermitian matrix from ``spec`` using the stream addressed by ``seed``.

    Returns a read-only complex ``(N, N)`` array whose lower triangle is the
    exact conjugate of the upper triangle and whose diagonal is real.
    """
    N = spec.N
    rng = seed.generator()
    x, y = spec.entry.sample_components(rng, (N, N))
    sigma = np.sqrt(spec.profile.variances)
    upper = np.triu(sigma * (x + 1j * y) * (1.0 / math.sqrt(2.0)), 1)
    h = upper + upper.conj().T
    idx = np.arange(N)
    h[idx, idx] = sigma[idx, idx] * x[idx, idx]
    return _freeze(h)


def sample_gue(N: int, seed: SeedSpec) -> np.ndarray:
    """Standard GUE sample: flat profile, complex Gaussian entries."""
    return sample_matrix(EnsembleSpec.gue(N), seed)


def gaussian_divisible(base: np.ndarray, a: float, seed: SeedSpec) -> np.ndarray:
    """Return ``sqrt(1 - a^2) * base + a * V`` with ``V`` a fresh GUE sample.

    ``seed`` addresses the stream of ``V`` only, so it must differ from the
    stream that produced ``base``.
    """
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise ValidationError(f"interpolation parameter a must lie in [0, 1], got {a}")
    base = np.asarray(base)
    if a == 0.0:
        return _freeze(base.copy())
    v = sample_gue(base.shape[0], seed)
    if a == 1.0:
        return v
    return _freeze(math.sqrt(1.0 - a * a) * base + a * v)


def interpolation_time(N: int, eps: float) -> float:
    """``N^(-1/2 + eps)``, the Gaussian component size that suffices for the sine-kernel limit."""
    if not 0.0 < eps <= 0.5:
        raise ValidationError(f"eps must lie in (0, 1/2] so that a stays in (0, 1], got {eps}")
    if N < 1:
        raise ValidationError(f"dimension N must be >= 1, got {N}")
    return float(N) ** (-0.5 + eps)


def ensure_seed(seed: SeedSpec | int | Sequence[int] | None) -> SeedSpec:
    """Coerce an int or ``(master, stream)`` pair to a :class:`SeedSpec`."""
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        return SeedSpec(0)
    if isinstance(seed, (int, np.integer)):
        return SeedSpec(int(seed))
    return SeedSpec(*seed)

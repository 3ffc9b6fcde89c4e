"""Monte Carlo estimators of rescaled k-point correlation integrals.

For a test function ``O`` on ``R^k`` and a bulk energy ``E`` the estimated
quantity is

    E[ sum over ordered k-tuples of distinct indices of O(alpha_i1, ..., alpha_ik) ]

with ``alpha_i = N rho(E) (lambda_i - E)``.  This equals the integral of ``O``
against the k-point correlation function rescaled at ``E``, and tends to the
integral of ``O`` against the sine-kernel determinant in the bulk.

Sample ``i`` of a run seeded with ``seed`` always uses the stream
``seed.child(i)``; per-sample values are reduced in ascending ``i``, so
results do not depend on the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from wignerlab.ensembles import EnsembleSpec, SeedSpec, ensure_seed, gaussian_divisible, sample_matrix
from wignerlab.exceptions import NumericalError, ValidationError
from wignerlab.observables import Observable, bump
from wignerlab.predictions import predicted_statistic
from wignerlab.spectra import LocalCoordinates, eigenvalues, rescale_around_energy

__all__ = [
    "Observable",
    "bump",
    "Accumulator",
    "CorrelationStatistic",
    "ComparisonResult",
    "SweepRow",
    "set_partitions",
    "ordered_tuple_sum",
    "per_sample_statistic",
    "empirical_statistic",
    "compare_ensembles",
    "divisibility_sweep",
    "convergence_sweep",
]

MAX_LOCAL_POINTS = 10_000


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------


@dataclass
class Accumulator:
    """Running count, mean and sum of squared deviations (Welford / Chan)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)

    def extend(self, xs) -> Accumulator:
        for x in np.asarray(xs, dtype=float).ravel():
            self.push(float(x))
        return self

    def merge(self, other: Accumulator) -> Accumulator:
        """Accumulator of the concatenated streams ``self`` then ``other``."""
        n = self.count + other.count
        if n == 0:
            return Accumulator()
        if self.count == 0:
            return Accumulator(other.count, other.mean, other.m2)
        if other.count == 0:
            return Accumulator(self.count, self.mean, self.m2)
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return Accumulator(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def stderr(self) -> float:
        return math.sqrt(max(self.variance, 0.0) / self.count) if self.count > 1 else math.nan


# ---------------------------------------------------------------------------
# result records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationStatistic:
    k: int
    E: float
    label: str
    estimate: float
    stderr: float
    M: int
    N: int
    observable_id: str = ""

    def z_against(self, value: float) -> float:
        """``(estimate - value) / stderr``."""
        diff = self.estimate - value
        if self.stderr > 0:
            return diff / self.stderr
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)


@dataclass(frozen=True)
class ComparisonResult:
    first: CorrelationStatistic
    second: CorrelationStatistic
    difference: float
    combined_stderr: float

    @property
    def z_score(self) -> float:
        if self.combined_stderr > 0:
            return self.difference / self.combined_stderr
        return 0.0 if self.difference == 0 else math.copysign(math.inf, self.difference)


@dataclass(frozen=True)
class SweepRow:
    N: int
    statistic: CorrelationStatistic
    prediction: float
    deviation: float


# ---------------------------------------------------------------------------
# per-sample statistic
# ---------------------------------------------------------------------------


def set_partitions(items: Sequence[int]):
    """Yield every set partition of ``items`` as a list of blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first], *part]
        for i in range(len(part)):
            yield [*part[:i], [first, *part[i]], *part[i + 1:]]


def ordered_tuple_sum(factors) -> float:
    """``sum over distinct i_1..i_k of prod_j factors[j][i_j]``.

    Uses Moebius inversion over set partitions of the axes: the unrestricted
    sum over a partition's blocks is a product of power sums, and the
    distinct-index sum is their signed combination with weights
    ``prod_blocks (-1)^(|B|-1) (|B|-1)!``.
    """
    F = np.asarray(factors, dtype=float)
    k = F.shape[0]
    if F.shape[1] == 0:
        return 0.0
    total = 0.0
    for part in set_partitions(range(k)):
        term = 1.0
        for block in part:
            term *= (-1) ** (len(block) - 1) * math.factorial(len(block) - 1) * float(
                np.prod(F[block], axis=0).sum()
            )
        total += term
    return total


def per_sample_statistic(coords: LocalCoordinates | np.ndarray, O: Observable) -> float:
    """Sum of ``O`` over ordered k-tuples of distinct rescaled eigenvalues.

    Only points inside the support box can contribute; they are located by
    binary search on the sorted coordinates.
    """
    alphas = coords.alphas if isinstance(coords, LocalCoordinates) else np.sort(np.asarray(coords, dtype=float))
    box = O.support_box
    lo, hi = min(b[0] for b in box), max(b[1] for b in box)
    i0, i1 = np.searchsorted(alphas, lo, side="left"), np.searchsorted(alphas, hi, side="right")
    n = int(i1 - i0)
    if n > MAX_LOCAL_POINTS:
        raise ValidationError(
            f"{n} eigenvalues inside the observable's support box (limit {MAX_LOCAL_POINTS}); "
            "the support is too large for a local statistic"
        )
    if n < O.k or O.amplitude == 0.0:
        return 0.0
    local = alphas[i0:i1]
    factors = np.stack([O.axis_factor(j, local) for j in range(O.k)])
    return O.amplitude * ordered_tuple_sum(factors)


# ---------------------------------------------------------------------------
# Monte Carlo runs
# ---------------------------------------------------------------------------


def _draw_plain(spec, sampler, s):
    return sampler(spec, s)


def _draw_divisible(spec, a, s):
    return gaussian_divisible(sample_matrix(spec, s.child(0)), a, s.child(1))


def _chunk_values(draw, E, O, seed, energy_window, indices):
    out = np.empty(len(indices))
    for n, i in enumerate(indices):
        s = seed.child(i)
        try:
            spectrum = eigenvalues(draw(s))
        except NumericalError as exc:
            raise NumericalError(f"sample {i} (seed {s}) failed: {exc}") from exc
        energy = E
        if energy_window:
            energy = E + energy_window * (s.child(0).generator().random() - 0.5)
        out[n] = per_sample_statistic(rescale_around_energy(spectrum, energy), O)
    return out


def _sample_values(draw, E, O, M, seed, workers=1, energy_window=None):
    indices = np.arange(M)
    if workers <= 1 or M < 2 * workers:
        return _chunk_values(draw, E, O, seed, energy_window, indices)
    chunks = np.array_split(indices, min(M, 8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(partial(_chunk_values, draw, E, O, seed, energy_window), chunks))
    return np.concatenate(parts)


def _check_run(E, O, M):
    if not abs(E) < 2.0:
        raise ValidationError(f"energy must lie in the bulk |E| < 2, got {E}")
    if int(M) < 2:
        raise ValidationError(f"need at least 2 samples, got M={M}")
    if not isinstance(O, Observable):
        raise ValidationError("observable must be an Observable")


def _statistic(values, E, O, label, N):
    acc = Accumulator().extend(values)
    return CorrelationStatistic(O.k, float(E), label, acc.mean, acc.stderr, acc.count, N, O.identifier)


def empirical_statistic(
    spec: EnsembleSpec,
    E: float,
    O: Observable,
    M: int,
    seed: SeedSpec | int,
    workers: int = 1,
    sampler: Callable | None = None,
    energy_window: float | None = None,
) -> CorrelationStatistic:
    """Monte Carlo estimate of the rescaled correlation integral of ``O`` at ``E``.

    Parameters
    ----------
    spec : EnsembleSpec
    E : float
        Bulk energy, ``|E| < 2``.
    O : Observable
    M : int
        Number of independent matrices.
    seed : SeedSpec or int
        Sample ``i`` uses ``seed.child(i)``.
    workers : int
        Worker processes; the result is identical for every value.
    sampler : callable, optional
        ``sampler(spec, seed) -> matrix``, default :func:`sample_matrix`.
        Must be picklable when ``workers > 1``.
    energy_window : float, optional
        If given, each sample is rescaled at an energy drawn uniformly from
        ``[E - window/2, E + window/2]`` (energy-averaged contrast mode).
        Off by default: the estimator works at the fixed energy ``E``.
    """
    _check_run(E, O, M)
    seed = ensure_seed(seed)
    draw = partial(_draw_plain, spec, sampler or sample_matrix)
    values = _sample_values(draw, E, O, int(M), seed, workers, energy_window)
    return _statistic(values, E, O, spec.label, spec.N)


def compare_ensembles(
    specA: EnsembleSpec,
    specB: EnsembleSpec,
    E: float,
    O: Observable,
    M: int,
    seed: SeedSpec | int,
    workers: int = 1,
    shared_seed: bool = False,
) -> ComparisonResult:
    """Difference of the two ensembles' correlation integrals with its z-score.

    The runs use the independent substreams ``seed.child(0)`` and
    ``seed.child(1)``; with ``shared_seed`` both use ``seed.child(0)``.
    """
    if specA.N != specB.N:
        raise ValidationError(f"ensembles must share N to be compared, got {specA.N} and {specB.N}")
    seed = ensure_seed(seed)
    sa = empirical_statistic(specA, E, O, M, seed.child(0), workers)
    sb = empirical_statistic(specB, E, O, M, seed.child(0 if shared_seed else 1), workers)
    return ComparisonResult(sa, sb, sa.estimate - sb.estimate, math.hypot(sa.stderr, sb.stderr))


def divisibility_sweep(
    base: EnsembleSpec,
    a_values: Sequence[float],
    E: float,
    O: Observable,
    M: int,
    seed: SeedSpec | int,
    workers: int = 1,
) -> list[CorrelationStatistic]:
    """Statistics of ``sqrt(1 - a^2) H0 + a V`` for each ``a``, ``H0`` drawn from ``base``.

    Entry ``j`` of the sweep uses the substream ``seed.child(j)``; within a
    sample the base matrix and the GUE part use separate child streams.
    """
    _check_run(E, O, M)
    seed = ensure_seed(seed)
    a_values = [float(a) for a in a_values]
    if any(not 0.0 <= a <= 1.0 for a in a_values):
        raise ValidationError(f"every a must lie in [0, 1], got {a_values}")
    out = []
    for j, a in enumerate(a_values):
        draw = partial(_draw_divisible, base, a)
        values = _sample_values(draw, E, O, int(M), seed.child(j), workers)
        out.append(_statistic(values, E, O, f"{base.label}/a={a:.6g}", base.N))
    return out


def convergence_sweep(
    spec_family: EnsembleSpec | Callable[[int], EnsembleSpec],
    N_values: Sequence[int],
    E: float,
    O: Observable,
    M: int,
    seed: SeedSpec | int,
    workers: int = 1,
    tol: float | None = None,
) -> list[SweepRow]:
    """Statistic at each ``N`` next to the sine-kernel prediction.

    ``spec_family`` is either a callable ``N -> EnsembleSpec`` or a spec whose
    entry law and profile recipe are reused at each ``N``.  Entry ``j`` uses
    the substream ``seed.child(j)``.
    """
    N_values = [int(n) for n in N_values]
    if N_values != sorted(N_values):
        raise ValidationError("N_values must be ascending")
    family = spec_family.with_N if isinstance(spec_family, EnsembleSpec) else spec_family
    seed = ensure_seed(seed)
    prediction = predicted_statistic(O, O.k, tol).value
    rows = []
    for j, n in enumerate(N_values):
        stat = empirical_statistic(family(n), E, O, M, seed.child(j), workers)
        rows.append(SweepRow(n, stat, prediction, stat.estimate - prediction))
    return rows

"""Entry moments, the four-moment matching condition, and atomic moment fits.

Moments here are those of the standardized complex entry ``v`` (order one, not
scaled by ``N``).  For a pair ``(a, b)`` the mixed moment is
``E[(Re v)^a (Im v)^b]``; with independent components it factors as
``2^(-(a+b)/2) E[X^a] E[Y^b]`` in terms of the standardized marginals.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import gamma as gamma_fn

from wignerlab.ensembles import EntryDistribution, SeedSpec, ensure_seed
from wignerlab.exceptions import (
    DivergentMomentError,
    FitError,
    InfeasibleMomentsError,
    ValidationError,
)

__all__ = [
    "MOMENT_PAIRS",
    "ComponentMoments",
    "MatchRecord",
    "MatchReport",
    "compute_moments",
    "check_four_moment_condition",
    "fit_atomic_match",
    "entry_moment",
]

MOMENT_PAIRS: tuple[tuple[int, int], ...] = tuple(
    (a, total - a) for total in range(1, 5) for a in range(total, -1, -1)
)

_DEFAULT_MC = 1_000_000


@dataclass(frozen=True)
class ComponentMoments:
    """Mixed moments ``E[(Re v)^a (Im v)^b]`` for ``1 <= a + b <= 4``.

    ``stderr`` is zero for analytic entries; ``analytic`` flags provenance.
    """

    values: dict
    stderr: dict = field(default_factory=dict)
    analytic: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [p for p in MOMENT_PAIRS if p not in self.values]
        if missing:
            raise ValidationError(f"moment set incomplete, missing pairs {missing}")
        for p in MOMENT_PAIRS:
            self.stderr.setdefault(p, 0.0)
            self.analytic.setdefault(p, True)
        if self.analytic[(2, 0)] and self.analytic[(0, 2)]:
            total = self.values[(2, 0)] + self.values[(0, 2)]
            if abs(total - 1.0) > 1e-10:
                raise ValidationError(f"E(Re v)^2 + E(Im v)^2 = {total:.12g}, expected 1")

    def __getitem__(self, pair):
        return self.values[tuple(pair)]

    @property
    def is_analytic(self) -> bool:
        return all(self.analytic.values())

    def standardized_marginal(self, component: str) -> np.ndarray:
        """``E X^r`` for r = 1..4 with ``X = sqrt(2) Re v`` (or ``Im v``)."""
        key = (lambda r: (r, 0)) if component == "re" else (lambda r: (0, r))
        return np.array([2.0 ** (r / 2) * self.values[key(r)] for r in range(1, 5)])


def _mc_components(dist, n, seed):
    if n is not None and int(n) <= 0:
        raise ValidationError("Monte Carlo moment estimation needs mc_samples >= 1")
    rng = ensure_seed(seed).generator()
    return dist.sample_components(rng, int(n))


def compute_moments(
    dist: EntryDistribution, mc_samples: int | None = None, seed: SeedSpec | int | None = None
) -> ComponentMoments:
    """Mixed moments of orders 1..4 for an entry law.

    Closed forms are used unless ``mc_samples`` is given, in which case every
    pair is estimated by direct Monte Carlo over ``(Re v, Im v)`` with its
    standard error.  The heavy-tailed law has closed-form moments below its
    tail index, and its tail index exceeds 4, so it is analytic by default too.
    """
    if mc_samples is None:
        vals = {}
        for a, b in MOMENT_PAIRS:
            vals[(a, b)] = (
                2.0 ** (-(a + b) / 2) * dist.marginal_moment(a, "re") * dist.marginal_moment(b, "im")
            )
        return ComponentMoments(vals)

    x, y = _mc_components(dist, mc_samples, seed)
    re, im = x / math.sqrt(2.0), y / math.sqrt(2.0)
    n = re.size
    vals, errs, flags = {}, {}, {}
    for a, b in MOMENT_PAIRS:
        g = re**a * im**b
        vals[(a, b)] = float(g.mean())
        errs[(a, b)] = float(g.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        flags[(a, b)] = False
    return ComponentMoments(vals, errs, flags)


@dataclass(frozen=True)
class MatchRecord:
    a: int
    b: int
    value_v: float
    value_w: float
    difference: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class MatchReport:
    """Per-pair comparison of two moment sets against ``N^(-delta - 2 + (a+b)/2)``."""

    N: int
    delta: float
    records: tuple[MatchRecord, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def max_difference(self) -> float:
        return max(r.difference for r in self.records)

    def record(self, a: int, b: int) -> MatchRecord:
        for r in self.records:
            if (r.a, r.b) == (a, b):
                return r
        raise KeyError((a, b))

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "delta": self.delta,
            "passed": self.passed,
            "records": [r.__dict__.copy() for r in self.records],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["a", "b", "value_v", "value_w", "difference", "bound", "passed"])
        for r in self.records:
            writer.writerow([r.a, r.b] + [repr(float(x)) for x in (r.value_v, r.value_w, r.difference, r.bound)] + [r.passed])
        return buf.getvalue()


def check_four_moment_condition(
    mv: ComponentMoments, mw: ComponentMoments, N: int, delta: float
) -> MatchReport:
    """Compare two moment sets pair by pair.

    Pair ``(a, b)`` passes when ``|mv - mw| <= N^(-delta - 2 + (a+b)/2)``.
    The report passes when every pair does.

    >>> g = compute_moments(EntryDistribution.gaussian())
    >>> check_four_moment_condition(g, g, 10**6, 0.5).passed
    True
    """
    records = []
    for a, b in MOMENT_PAIRS:
        v, w = mv[(a, b)], mw[(a, b)]
        diff = abs(v - w)
        bound = float(N) ** (-delta - 2.0 + (a + b) / 2.0)
        records.append(MatchRecord(a, b, v, w, diff, bound, bool(diff <= bound)))
    return MatchReport(int(N), float(delta), tuple(records))


# ---------------------------------------------------------------------------
# atomic fits
# ---------------------------------------------------------------------------


def _symmetric_residual(theta, m2, m4):
    x, p = theta
    return np.array([p * x**2 - m2, p * x**4 - m4])


def _symmetric_jacobian(theta):
    x, p = theta
    return np.array([[2 * p * x, x**2], [4 * p * x**3, x**4]])


def _general_residual(theta, m):
    x1, x2, p1, p2 = theta
    j = np.arange(1, 5)
    return p1 * x1**j + p2 * x2**j - m


def _general_jacobian(theta):
    x1, x2, p1, p2 = theta
    j = np.arange(1, 5)
    return np.column_stack([p1 * j * x1 ** (j - 1), p2 * j * x2 ** (j - 1), x1**j, x2**j])


def _damped_newton(residual, jacobian, theta, tol, max_iter):
    theta = np.asarray(theta, dtype=float)
    r = residual(theta)
    best = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if best == 0.0:
            break
        try:
            step = np.linalg.solve(jacobian(theta), -r)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        while t > 1e-8:
            cand = theta + t * step
            rc = residual(cand)
            if np.linalg.norm(rc) < np.linalg.norm(r):
                break
            t *= 0.5
        else:
            break
        theta, r = cand, rc
        best = float(np.max(np.abs(r)))
    return theta, best


def _fit_component(m, support_size, symmetric, tol, max_iter):
    """Fit standardized marginal moments ``m = (m1, m2, m3, m4)`` with ``support_size`` atoms.

    One atom is pinned at 0; the others (and all probabilities) are free.
    Returns ``(atoms, probs, residual)``.
    """
    m1, m2, m3, m4 = m
    if m4 < m2**2:
        raise InfeasibleMomentsError(
            f"fourth moment {m4:.6g} below squared second moment {m2**2:.6g}; no probability law exists"
        )
    # mean 0: a law exists iff m4 m2 - m3^2 - m2^3 >= 0 (Hankel determinant)
    if m4 * m2 - m3**2 - m2**3 < -tol:
        raise InfeasibleMomentsError(
            f"moments violate m4 m2 >= m3^2 + m2^3 ({m4 * m2:.6g} < {m3**2 + m2**3:.6g})"
        )
    x0 = math.sqrt(m4 / m2)
    p0 = m2**2 / m4

    if symmetric:
        n_pairs = (support_size - 1) // 2
        res = math.inf
        if n_pairs == 1:
            theta, res = _damped_newton(
                lambda t: _symmetric_residual(t, m2, m4), _symmetric_jacobian, [x0, p0], tol, max_iter
            )
            xs, ps = theta[:1], theta[1:]
        if res > tol:
            # unknowns: pair locations, pair masses, mass at 0; total mass is a residual row
            init = np.concatenate([x0 * np.linspace(0.7, 1.3, n_pairs), np.full(n_pairs, p0 / n_pairs), [1 - p0]])

            def fun(t):
                xs, ps = t[:n_pairs], t[n_pairs:2 * n_pairs]
                return np.array([ps @ xs**2 - m2, ps @ xs**4 - m4, ps.sum() + t[-1] - 1.0])

            sol = optimize.least_squares(
                fun, init,
                bounds=(np.zeros(2 * n_pairs + 1), np.r_[np.full(n_pairs, np.inf), np.ones(n_pairs + 1)]),
                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=50 * max_iter,
            )
            xs, ps = sol.x[:n_pairs], sol.x[n_pairs:2 * n_pairs]
            res = float(np.max(np.abs(fun(sol.x))))
        atoms = np.concatenate([-xs, [0.0], xs])
        probs = np.concatenate([ps / 2, [1.0 - ps.sum()], ps / 2])
    else:
        n_free = support_size - 1
        target = np.array([m1, m2, m3, m4])
        res = math.inf
        if n_free == 2:
            theta, res = _damped_newton(
                lambda t: _general_residual(t, target), _general_jacobian,
                [-x0, x0, p0 / 2, p0 / 2], tol, max_iter,
            )
            xs, ps = theta[:2], theta[2:]
        if res > tol:
            init = np.concatenate([x0 * np.linspace(-1.3, 1.3, n_free), np.full(n_free, p0 / n_free), [1 - p0]])

            def fun(t):
                xs, ps = t[:n_free], t[n_free:2 * n_free]
                moments = np.array([ps @ xs**j for j in range(1, 5)]) - target
                return np.r_[moments, ps.sum() + t[-1] - 1.0]

            sol = optimize.least_squares(
                fun, init,
                bounds=(np.r_[np.full(n_free, -np.inf), np.zeros(n_free + 1)],
                        np.r_[np.full(n_free, np.inf), np.ones(n_free + 1)]),
                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=50 * max_iter,
            )
            xs, ps = sol.x[:n_free], sol.x[n_free:2 * n_free]
            res = float(np.max(np.abs(fun(sol.x))))
        atoms = np.concatenate([xs, [0.0]])
        probs = np.concatenate([ps, [1.0 - ps.sum()]])

    if np.any(probs < -1e-14):
        raise InfeasibleMomentsError(f"fit needs negative probabilities {probs}; target infeasible on this support")
    if res > tol:
        raise FitError(f"moment fit did not converge: residual {res:.3g} > tol {tol:.3g}", residual=res)
    probs = np.clip(probs, 0.0, None)
    order = np.argsort(atoms)
    return atoms[order], probs[order], res


def fit_atomic_match(
    target: ComponentMoments,
    support_size: int = 3,
    tol: float = 1e-10,
    symmetric: bool | None = None,
    max_iter: int = 100,
) -> EntryDistribution:
    """Atomic entry law whose marginals match the target's moments of orders 1..4.

    Each component gets ``support_size`` atoms, one of them pinned at 0.  For
    three atoms the moment equations are square and solved by damped Newton;
    otherwise (or if Newton stalls) bounded least squares is used.
    ``symmetric=None`` picks the symmetric parametrization ``{-x, 0, x}``
    whenever the target's odd moments vanish, which makes the fitted odd
    moments exactly zero.

    Raises
    ------
    InfeasibleMomentsError
        If the target violates ``m4 >= m2^2`` (or the Hankel condition), or if
        the best fit needs negative probabilities.
    FitError
        If the residual stays above ``tol``.
    """
    if support_size < 3:
        raise ValidationError("support_size must be at least 3")
    se = target.stderr
    for a, b in MOMENT_PAIRS:
        if a and b:
            gap = abs(target[(a, b)] - target[(a, 0)] * target[(0, b)])
            allow = max(1e-9, 4.0 * (se[(a, b)] + se[(a, 0)] + se[(0, b)]))
            if gap > allow:
                raise ValidationError(
                    f"target moments do not factor at pair {(a, b)} (gap {gap:.3g}); components must be independent"
                )

    fitted = {}
    for comp in ("re", "im"):
        m = target.standardized_marginal(comp)
        # entry laws are standardized: mean 0 and variance 1 are imposed exactly
        r1 = (1, 0) if comp == "re" else (0, 1)
        r2 = (2, 0) if comp == "re" else (0, 2)
        if abs(m[0]) > max(tol, 4 * math.sqrt(2) * se[r1]) or abs(m[1] - 1.0) > max(tol, 4 * 2 * se[r2]):
            raise ValidationError(f"{comp} marginal is not standardized (mean {m[0]:.3g}, variance {m[1]:.6g})")
        m = np.array([0.0, 1.0, m[2], m[3]])
        sym = symmetric if symmetric is not None else abs(m[2]) <= max(tol, 4 * 2**1.5 * se[(3, 0) if comp == "re" else (0, 3)])
        if sym and support_size % 2 == 0:
            if symmetric:
                raise ValidationError("symmetric supports need an odd number of atoms")
            sym = False
        if sym:
            m[2] = 0.0
        fitted[comp] = _fit_component(m, support_size, sym, tol, max_iter)

    (xa, pa, _), (ya, qa, _) = fitted["re"], fitted["im"]
    return EntryDistribution.atomic(xa, pa, ya, qa)


# ---------------------------------------------------------------------------
# absolute moments
# ---------------------------------------------------------------------------


def entry_moment(
    dist: EntryDistribution,
    p: float,
    mc_samples: int | None = None,
    seed: SeedSpec | int | None = None,
    return_stderr: bool = False,
):
    """Absolute moment ``E|v|^p`` of a standardized entry.

    Exact for Gaussian (``Gamma(1 + p/2)``), Bernoulli (1), atomic laws
    (enumeration of atom pairs) and heavy-tailed laws at even integer ``p``
    (binomial expansion of ``((X^2 + Y^2)/2)^(p/2)``); Monte Carlo otherwise or
    when ``mc_samples`` is given.  With ``return_stderr`` the result is a
    ``(value, stderr)`` pair, ``stderr`` being 0 for exact values.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValidationError(f"moment order must be >= 1, got {p}")
    if dist.kind == "heavy-tailed" and p >= dist.gamma:
        raise DivergentMomentError(
            f"E|v|^{p:g} diverges for tail index gamma = {dist.gamma:g} (need p < gamma)"
        )

    value = None
    if mc_samples is None:
        if dist.kind == "complex-gaussian":
            value = float(gamma_fn(1.0 + p / 2.0))
        elif dist.kind == "four-point-bernoulli":
            value = 1.0
        elif dist.kind == "atomic":
            x = np.asarray(dist.re_atoms)[:, None]
            y = np.asarray(dist.im_atoms)[None, :]
            w = np.asarray(dist.re_probs)[:, None] * np.asarray(dist.im_probs)[None, :]
            value = float(np.sum(w * (np.abs(x + 1j * y) / math.sqrt(2.0)) ** p))
        elif p.is_integer() and int(p) % 2 == 0:
            q = int(p) // 2
            value = 2.0**-q * sum(
                math.comb(q, k) * dist.marginal_moment(2 * k, "re") * dist.marginal_moment(2 * (q - k), "im")
                for k in range(q + 1)
            )
        else:
            mc_samples = _DEFAULT_MC
    if value is not None:
        return (value, 0.0) if return_stderr else value

    x, y = _mc_components(dist, mc_samples, seed)
    g = ((x * x + y * y) / 2.0) ** (p / 2.0)
    value = float(g.mean())
    err = float(g.std(ddof=1) / math.sqrt(g.size)) if g.size > 1 else math.inf
    return (value, err) if return_stderr else value

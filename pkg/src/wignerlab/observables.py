"""Smooth compactly supported test functions on R^k."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wignerlab.exceptions import ValidationError

__all__ = ["bump", "Observable"]


def bump(x):
    """Standard bump ``exp(1 - 1/(1 - x^2))`` on ``|x| < 1``, zero elsewhere; ``bump(0) = 1``."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    gap = np.where(inside, 1.0 - x * x, 1.0)
    out = np.where(inside, np.exp(1.0 - 1.0 / gap), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Observable:
    """Product of translated and scaled bumps, ``amp * prod_j bump((alpha_j - c_j)/w_j)``.

    Continuous, bounded by ``|amplitude| <= 1`` and zero outside the box
    ``prod_j [c_j - w_j, c_j + w_j]``.
    """

    centers: tuple[float, ...]
    half_widths: tuple[float, ...]
    amplitude: float = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.centers))
        w = tuple(float(v) for v in np.ravel(self.half_widths))
        if len(c) != len(w) or not c:
            raise ValidationError("centers and half-widths must be nonempty and of equal length")
        if any(not (v > 0 and np.isfinite(v)) for v in w):
            raise ValidationError("half-widths must be positive and finite")
        if not all(np.isfinite(c)):
            raise ValidationError("centers must be finite")
        if not abs(self.amplitude) <= 1.0:
            raise ValidationError(f"amplitude must satisfy |amp| <= 1, got {self.amplitude}")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "half_widths", w)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @classmethod
    def product_bump(cls, k: int, center: float = 0.0, half_width: float = 3.0, amplitude: float = 1.0):
        """Same bump on every axis."""
        return cls((center,) * k, (half_width,) * k, amplitude)

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def support_box(self) -> list[tuple[float, float]]:
        return [(c - w, c + w) for c, w in zip(self.centers, self.half_widths)]

    @property
    def identifier(self) -> str:
        fmt = lambda vals: ",".join(f"{v:g}" for v in vals)  # noqa: E731
        return f"bump(c={fmt(self.centers)};w={fmt(self.half_widths)};amp={self.amplitude:g})"

    def axis_factor(self, j: int, alpha):
        """The j-th factor ``bump((alpha - c_j)/w_j)``, without the amplitude."""
        return bump((np.asarray(alpha, dtype=float) - self.centers[j]) / self.half_widths[j])

    def __call__(self, alphas):
        """Evaluate at points of shape ``(..., k)``."""
        a = np.asarray(alphas, dtype=float)
        if a.shape[-1] != self.k:
            raise ValidationError(f"observable has arity {self.k}, got points with last axis {a.shape[-1]}")
        out = np.full(a.shape[:-1], self.amplitude)
        for j in range(self.k):
            out = out * self.axis_factor(j, a[..., j])
        return out

    def mirrored(self) -> Observable:
        """``alpha -> O(-alpha)``."""
        return Observable(tuple(-c for c in self.centers), self.half_widths, self.amplitude)

    def to_dict(self) -> dict:
        return {"centers": list(self.centers), "half_widths": list(self.half_widths), "amplitude": self.amplitude}

    @classmethod
    def from_dict(cls, data: dict) -> Observable:
        if "centers" in data:
            return cls(data["centers"], data["half_widths"], data.get("amplitude", 1.0))
        return cls.product_bump(int(data["k"]), data.get("center", 0.0), data.get("half_width", 3.0),
                                data.get("amplitude", 1.0))

"""Warped product ambient spaces ``I x_f M(c)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .expr import DomainError, Expression, Jet, parse_expr

__all__ = ["Ambient", "LogDerivatives", "AmbientError"]


class AmbientError(ValueError):
    pass


class LogDerivatives(NamedTuple):
    f: float
    df: float
    d2f: float
    dlogf: float
    d2logf: float


@dataclass(frozen=True)
class Ambient:
    """Warped product ``dt^2 + f(t)^2 g_M`` over the open interval ``t_range``.

    ``n`` is the hypersurface dimension, so the ambient has dimension n+1.
    ``fiber_curvature`` is the constant sectional curvature of the fiber.
    """

    f: Expression
    t_range: tuple[float, float]
    fiber_curvature: int = 0
    n: int = 2

    def __post_init__(self):
        lo, hi = self.t_range
        if not lo < hi:
            raise AmbientError(f"empty interval t_range={self.t_range!r}")
        if self.fiber_curvature not in (-1, 0, 1):
            raise AmbientError("fiber_curvature must be -1, 0 or 1")
        if int(self.n) != self.n or self.n < 2:
            raise AmbientError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if self.f.var != "t":
            raise AmbientError("warping function must be written in the variable 't'")

    @classmethod
    def from_text(cls, f: str, t_range=(-1e3, 1e3), fiber_curvature: int = 0, n: int = 2):
        return cls(parse_expr(f, "t"), (float(t_range[0]), float(t_range[1])), int(fiber_curvature), int(n))

    def contains(self, t: float) -> bool:
        lo, hi = self.t_range
        return lo < t < hi

    def warp_jet(self, t: float) -> Jet:
        """``(f, f', f'')`` at ``t``; the interval is open."""
        if not self.contains(t):
            raise DomainError(f"t={t!r} outside the open interval {self.t_range!r}")
        j = self.f.jet(t)
        if not j.value > 0.0:
            raise DomainError(f"warping function f({t!r})={j.value!r} is not positive")
        return j

    def log_derivatives(self, t: float) -> LogDerivatives:
        f, df, d2f = self.warp_jet(t)
        q = df / f
        return LogDerivatives(f, df, d2f, q, d2f / f - q * q)

    def ambient_sectional(self, t: float) -> tuple[float, float]:
        """Sectional curvatures of the planes ``(d/dt, V)`` and ``(V, W)``."""
        f, df, d2f = self.warp_jet(t)
        return -d2f / f, (self.fiber_curvature - df * df) / (f * f)

    def curvature_condition_margin(self, t: float) -> float:
        """``f'^2 - f f'' - c``; non-negative where ``c <= f'^2 - f f''`` holds."""
        f, df, d2f = self.warp_jet(t)
        return (df * df - f * d2f) - self.fiber_curvature

    def plane_sectional(self, t: float, cos2: float) -> float:
        """Sectional curvature of a plane spanned by a unit vector making
        ``<X, d/dt>^2 = cos2`` and a fiber direction orthogonal to both."""
        k_tv, k_vw = self.ambient_sectional(t)
        return cos2 * k_tv + (1.0 - cos2) * k_vw

    def to_config(self) -> dict:
        return {
            "f": self.f.source,
            "t_range": list(self.t_range),
            "fiber_curvature": self.fiber_curvature,
            "n": self.n,
        }


def log_derivatives(a: Ambient, t: float) -> LogDerivatives:
    return a.log_derivatives(t)


def ambient_sectional(a: Ambient, t: float) -> tuple[float, float]:
    return a.ambient_sectional(t)


def curvature_condition_margin(a: Ambient, t: float) -> float:
    return a.curvature_condition_margin(t)

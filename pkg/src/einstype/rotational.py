"""Rotational hypersurfaces of ``R x_f R^n`` and slices of ``I x_f M(c)``.

A rotational hypersurface is generated by an arc-length profile
``s -> (zeta(s), 0, ..., 0, beta(s))`` rotated about the t-axis.  Given the
angle function ``theta = <N, d/dt>`` the profile solves

    zeta' = sqrt(1 - theta^2),    beta' = theta / f(zeta),

and the induced metric is ``ds^2 + sigma(s)^2 g_{S^{n-1}}`` with
``sigma = f(zeta) * beta``.  All tensors are reported in the orthonormal frame
adapted to the rotation: ``e0`` along the profile and the remaining vectors
tangent to the orbit spheres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from .ambient import Ambient
from .expr import DomainError, Expression, Jet, parse_expr

__all__ = [
    "AngleProfile",
    "AxiTensor",
    "LocalGeometry",
    "RotationalSurface",
    "SliceSurface",
    "SurfaceError",
    "QuadratureError",
    "build_surface",
    "shape_operator",
    "mean_curvature",
    "traceless_phi_norm2",
    "height_and_gradient",
    "embed_point",
    "sphere_chart",
]


class SurfaceError(ValueError):
    """Numerical failure while building or querying a surface."""

    def __init__(self, message: str, s: float | None = None):
        super().__init__(message if s is None else f"{message} (s={s!r})")
        self.s = s


class QuadratureError(SurfaceError):
    pass


@dataclass(frozen=True)
class AxiTensor:
    """Symmetric 2-tensor diagonal in the adapted orthonormal frame.

    ``vv_k`` is the distinguished orbit direction, ``vv_perp`` the remaining
    ``n - 2`` orbit directions.  For ``n = 2`` there is a single orbit
    direction and ``vv_perp`` mirrors ``vv_k``.
    """

    ss: float
    vv_k: float
    vv_perp: float

    @classmethod
    def radial(cls, ss: float, vv: float) -> "AxiTensor":
        return cls(ss, vv, vv)

    @classmethod
    def scalar(cls, a: float) -> "AxiTensor":
        return cls(a, a, a)

    @classmethod
    def orbit_k(cls, value: float, n: int) -> "AxiTensor":
        return cls(0.0, value, value if n == 2 else 0.0)

    def __add__(self, o: "AxiTensor") -> "AxiTensor":
        return AxiTensor(self.ss + o.ss, self.vv_k + o.vv_k, self.vv_perp + o.vv_perp)

    def __sub__(self, o: "AxiTensor") -> "AxiTensor":
        return AxiTensor(self.ss - o.ss, self.vv_k - o.vv_k, self.vv_perp - o.vv_perp)

    def __mul__(self, a: float) -> "AxiTensor":
        return AxiTensor(self.ss * a, self.vv_k * a, self.vv_perp * a)

    __rmul__ = __mul__

    def __neg__(self) -> "AxiTensor":
        return self * -1.0

    def trace(self, n: int) -> float:
        return self.ss + self.vv_k + (n - 2) * self.vv_perp

    def norm2(self, n: int) -> float:
        return self.ss**2 + self.vv_k**2 + (n - 2) * self.vv_perp**2

    def as_dict(self) -> dict[str, float]:
        return {"ss": self.ss, "vv_k": self.vv_k, "vv_perp": self.vv_perp}

    def abs(self) -> "AxiTensor":
        return AxiTensor(abs(self.ss), abs(self.vv_k), abs(self.vv_perp))


@dataclass(frozen=True)
class AngleProfile:
    theta: Expression
    s_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.s_range
        if not lo < hi:
            raise SurfaceError(f"empty s_range {self.s_range!r}")
        if self.theta.var != "s":
            raise SurfaceError("angle function must be written in the variable 's'")

    @classmethod
    def from_text(cls, theta: str, s_range) -> "AngleProfile":
        return cls(parse_expr(theta, "s"), (float(s_range[0]), float(s_range[1])))


@dataclass(frozen=True)
class LocalGeometry:
    """Pointwise data of a surface at parameter ``s``.

    ``c`` is ``sqrt(1 - theta^2) = |grad h|``; ``f, df, d2f`` are the warping
    function and its derivatives at the height ``h``.
    """

    s: float
    n: int
    theta: float
    dtheta: float
    d2theta: float
    c: float
    h: float
    dh: float
    d2h: float
    sigma: float
    dsigma: float
    d2sigma: float
    f: float
    df: float
    d2f: float

    @property
    def lf1(self) -> float:
        return self.df / self.f

    @property
    def lf2(self) -> float:
        q = self.df / self.f
        return self.d2f / self.f - q * q

    @property
    def grad_h2(self) -> float:
        return self.c * self.c


def _sqrt_one_minus_sq(x: float) -> float:
    return math.sqrt(max(0.0, (1.0 - x) * (1.0 + x)))


class RotationalSurface:
    """Rotational hypersurface sampled on a uniform grid.

    Node values of ``zeta`` and ``beta`` come from the ODE integration.
    Between nodes they are interpolated by quintic Hermite polynomials built
    from the exact first and second derivatives at the nodes; ``sigma`` and its
    derivatives are then assembled by the chain rule from the interpolated
    state and the exact jets of ``theta`` and ``f``.
    """

    kind = "rotational"

    def __init__(self, ambient: Ambient, profile: AngleProfile, zeta0: float, beta0: float,
                 grid: np.ndarray, zeta: np.ndarray, beta: np.ndarray, tolerance: float,
                 anchor: float):
        self.ambient = ambient
        self.profile = profile
        self.zeta0 = float(zeta0)
        self.beta0 = float(beta0)
        self.anchor = float(anchor)
        self.tolerance = float(tolerance)
        self.grid = np.asarray(grid, dtype=float)
        self.grid.setflags(write=False)
        self.n = ambient.n
        self.s_lo = float(self.grid[0])
        self.s_hi = float(self.grid[-1])

        nodes = []
        zd = np.empty((len(grid), 3))
        bd = np.empty((len(grid), 3))
        for i, s in enumerate(self.grid):
            geo = self._assemble(float(s), float(zeta[i]), float(beta[i]))
            nodes.append(geo)
            zd[i] = (geo.h, geo.dh, geo.d2h)
            b1 = geo.theta / geo.f
            b2 = (geo.dtheta - geo.theta * geo.df * geo.c / geo.f) / geo.f
            bd[i] = (beta[i], b1, b2)
        self._nodes = tuple(nodes)
        self._index = {float(s): i for i, s in enumerate(self.grid)}
        self._zeta = BPoly.from_derivatives(self.grid, zd)
        self._beta = BPoly.from_derivatives(self.grid, bd)

    # -- queries -----------------------------------------------------------

    def contains(self, s: float) -> bool:
        return self.s_lo <= s <= self.s_hi

    def _check(self, s: float) -> None:
        if not self.contains(s):
            raise SurfaceError(f"parameter outside sampled range [{self.s_lo}, {self.s_hi}]", s)

    def state(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Interpolated ``(zeta, beta)``; accepts arrays."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < self.s_lo) or np.any(s_arr > self.s_hi):
            raise SurfaceError("parameter outside sampled range")
        return self._zeta(s_arr), self._beta(s_arr)

    def sigma_value(self, s: float) -> float:
        """``f(zeta(s)) beta(s)`` from the interpolated state only."""
        z, b = self.state(s)
        return self.ambient.warp_jet(float(z)).value * float(b)

    def local(self, s: float) -> LocalGeometry:
        s = float(s)
        i = self._index.get(s)
        if i is not None:
            return self._nodes[i]
        self._check(s)
        z, b = self.state(s)
        return self._assemble(s, float(z), float(b))

    def _assemble(self, s: float, zeta: float, beta: float) -> LocalGeometry:
        th, dth, d2th = self.profile.theta.jet(s)
        if not abs(th) < 1.0:
            raise SurfaceError(f"angle function |theta|={abs(th)!r} is not < 1", s)
        try:
            f, df, d2f = self.ambient.warp_jet(zeta)
        except DomainError as exc:
            raise SurfaceError(f"profile left the ambient interval: {exc}", s) from None
        c = _sqrt_one_minus_sq(th)
        dz, d2z = c, -th * dth / c
        db = th / f
        d2b = (dth - th * df * dz / f) / f
        sigma = f * beta
        dsigma = df * dz * beta + f * db
        d2sigma = d2f * dz * dz * beta + df * d2z * beta + 2.0 * df * dz * db + f * d2b
        return LocalGeometry(s, self.n, th, dth, d2th, c, zeta, dz, d2z,
                             sigma, dsigma, d2sigma, f, df, d2f)

    def nodes(self) -> tuple[LocalGeometry, ...]:
        return self._nodes

    def arc_length_defect(self) -> np.ndarray:
        """``|zeta'^2 + f(zeta)^2 beta'^2 - 1|`` at every node and cell midpoint.

        Derivatives are those of the interpolated state, so the midpoints
        test the integration and interpolation rather than the ODE itself.
        """
        mids = 0.5 * (self.grid[1:] + self.grid[:-1])
        s = np.sort(np.concatenate([self.grid, mids]))
        z, _ = self.state(s)
        dz = self._zeta.derivative()(s)
        db = self._beta.derivative()(s)
        f = np.array([self.ambient.warp_jet(float(x)).value for x in z])
        return np.abs(dz * dz + f * f * db * db - 1.0)

    def __repr__(self) -> str:
        return (f"RotationalSurface(theta={self.profile.theta.source!r}, "
                f"f={self.ambient.f.source!r}, n={self.n}, m={len(self.grid)})")


class SliceSurface:
    """Level hypersurface ``{t0} x M^n`` with inward normal ``N = -d/dt``.

    The slice is homogeneous, so every query returns the same local data and
    the "grid" is a single representative point.  Height is constant.
    """

    kind = "slice"

    def __init__(self, ambient: Ambient, t0: float):
        if not ambient.contains(t0):
            raise SurfaceError(f"slice height {t0!r} outside {ambient.t_range!r}")
        self.ambient = ambient
        self.t0 = float(t0)
        self.n = ambient.n
        self.grid = np.zeros(1)
        self.grid.setflags(write=False)
        f, df, d2f = ambient.warp_jet(self.t0)
        self._geo = LocalGeometry(0.0, self.n, -1.0, 0.0, 0.0, 0.0, self.t0, 0.0, 0.0,
                                  f, 0.0, 0.0, f, df, d2f)

    def contains(self, s: float) -> bool:
        return True

    def local(self, s: float = 0.0) -> LocalGeometry:
        return self._geo

    def nodes(self) -> tuple[LocalGeometry, ...]:
        return (self._geo,)

    @property
    def radius(self) -> float:
        """Radius of the slice as a Riemannian manifold: ``f(t0)``."""
        return self._geo.f

    def arc_length_defect(self) -> np.ndarray:
        return np.zeros(1)

    def __repr__(self) -> str:
        return f"SliceSurface(t0={self.t0}, f={self.ambient.f.source!r}, n={self.n})"


def build_surface(a: Ambient, p: AngleProfile, zeta0: float, beta0: float, m: int,
                  tolerance: float = 1e-10, anchor: float | None = None) -> RotationalSurface:
    """Integrate the profile of a rotational hypersurface.

    ``zeta0`` and ``beta0`` are the values of ``zeta`` and ``beta`` at
    ``anchor`` (default: the start of ``p.s_range``).  The anchor may lie
    before the sampled range, e.g. at a point where ``|theta| = 1``.
    ``m`` is the number of uniformly spaced grid points.
    """
    if a.fiber_curvature != 0:
        raise SurfaceError("rotational hypersurfaces need the flat fiber R^n (fiber_curvature 0)")
    if m < 16:
        raise SurfaceError(f"need at least 16 grid points, got {m}")
    lo, hi = p.s_range
    grid = np.linspace(lo, hi, int(m))
    anchor = lo if anchor is None else float(anchor)
    if anchor > hi:
        raise SurfaceError("anchor must not lie beyond the end of the sampled range", anchor)

    for s in grid:
        th = p.theta.jet(float(s))
        if not th.finite:
            raise SurfaceError("angle function is not finite", float(s))
        if not abs(th.value) < 1.0:
            raise SurfaceError(f"|theta|={abs(th.value)!r} is not < 1 on the grid", float(s))

    def rhs(s, y):
        th = p.theta.jet(s).value
        if abs(th) > 1.0 + 1e-12:
            raise SurfaceError(f"|theta|={abs(th)!r} exceeds 1", s)
        f = a.warp_jet(y[0]).value
        return [_sqrt_one_minus_sq(th), th / f]

    def step(s0, s1, y0):
        try:
            sol = solve_ivp(rhs, (s0, s1), y0, method="RK45", rtol=tolerance, atol=tolerance)
        except DomainError as exc:
            raise SurfaceError(f"profile integration failed: {exc}", s0) from None
        if sol.status != 0:
            raise QuadratureError(f"quadrature did not converge: {sol.message}", s0)
        return sol.y[:, -1]

    zeta = np.empty(len(grid))
    beta = np.empty(len(grid))
    y_anchor = np.array([zeta0, beta0], dtype=float)

    fwd = [i for i, s in enumerate(grid) if s >= anchor]
    y, s_prev = y_anchor, anchor
    for i in fwd:
        if grid[i] != s_prev:
            y = step(s_prev, grid[i], y)
        zeta[i], beta[i] = y
        s_prev = grid[i]
    back = [i for i, s in enumerate(grid) if s < anchor][::-1]
    y, s_prev = y_anchor, anchor
    for i in back:
        y = step(s_prev, grid[i], y)
        zeta[i], beta[i] = y
        s_prev = grid[i]

    for i, s in enumerate(grid):
        if not a.contains(zeta[i]):
            raise SurfaceError(f"zeta={zeta[i]!r} left the ambient interval {a.t_range!r}", float(s))
        sigma = a.warp_jet(zeta[i]).value * beta[i]
        if not sigma > 0.0:
            raise SurfaceError(f"sigma={sigma!r} is not positive", float(s))
    return RotationalSurface(a, p, zeta0, beta0, grid, zeta, beta, tolerance, anchor)


def shape_operator(S, s: float) -> AxiTensor:
    """Principal curvatures (profile direction, orbit directions)."""
    g = S.local(s)
    if S.kind == "slice":
        k = -g.theta * g.lf1
        return AxiTensor.scalar(k)
    lf1 = g.lf1
    ss = -lf1 * g.theta - g.dtheta / g.c
    vv = g.c / g.sigma - lf1 * g.theta
    return AxiTensor.radial(ss, vv)


def mean_curvature(S, s: float) -> float:
    return shape_operator(S, s).trace(S.n) / S.n


def traceless_phi_norm2(S, s: float) -> float:
    """``|A|^2 - n H^2``; zero exactly at umbilical points."""
    a = shape_operator(S, s)
    n = S.n
    if a.ss == a.vv_k == a.vv_perp:
        return 0.0
    return max(0.0, a.norm2(n) - a.trace(n) ** 2 / n)


def height_and_gradient(S, s: float) -> tuple[float, float, float]:
    g = S.local(s)
    return g.h, g.dh, g.grad_h2


def sphere_chart(v) -> np.ndarray:
    """Unit vector ``X(v_1, ..., v_{n-1})`` of the standard spherical chart."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    k = len(v)
    out = np.empty(k + 1)
    sin_prod = 1.0
    for i in range(k):
        out[i] = sin_prod * math.cos(v[i])
        sin_prod *= math.sin(v[i])
    out[k] = sin_prod
    return out


def embed_point(S: RotationalSurface, s: float, v) -> np.ndarray:
    """Coordinates ``(t, x_1, ..., x_n)`` of the point ``phi(s, v)``."""
    if S.kind != "rotational":
        raise SurfaceError("embedding is defined for rotational hypersurfaces only")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if len(v) != S.n - 1:
        raise SurfaceError(f"expected {S.n - 1} angles, got {len(v)}", s)
    S._check(s)
    z, b = S.state(s)
    return np.concatenate(([float(z)], float(b) * sphere_chart(v)))

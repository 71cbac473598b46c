"""Brute-force tensor calculus on coordinate charts.

The finite-difference path only ever sees a metric-component function; it
knows nothing about warping functions, angle functions or shape operators.
That independence is what makes it useful as a check on the closed forms.

Conventions: ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``,
``R^a_{bcd}`` is the component of ``R(d_c, d_d) d_b``, ``Ric_{bd} = R^a_{bad}``
and the sectional curvature of ``(d_i, d_j)`` is
``R_{ijij} / (g_ii g_jj - g_ij^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ambient import Ambient
from .expr import Jet
from .rotational import AxiTensor, SurfaceError

__all__ = [
    "ChartMetric",
    "ChartError",
    "DEFAULT_STEP",
    "metric_derivatives",
    "christoffel_fd",
    "riemann_fd",
    "ricci_fd",
    "ricci_fd_axi",
    "sectional_fd",
    "scalar_fd",
    "riemann_symmetry_residuals",
    "coordinate_laplacian_fd",
    "fiber_coordinate_laplacian",
    "ricci_closed",
    "hessian_radial",
    "laplacian_radial",
    "hessian_height_intrinsic",
    "oracle_points",
]

DEFAULT_STEP = 1e-4
#: Angles of the sphere chart that carry a sin^2 factor stay this far from 0 and pi.
ANGLE_GUARD = 0.2


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class ChartMetric:
    """A metric given by its components in one coordinate chart.

    ``sphere_slots`` lists the coordinate indices whose sine appears in the
    metric (polar angles of a sphere chart); points too close to their
    degenerate values are rejected.
    """

    dim: int
    labels: tuple[str, ...]
    components: Callable[[np.ndarray], np.ndarray]
    sphere_slots: tuple[int, ...] = ()
    bounds: dict | None = None

    def __call__(self, p) -> np.ndarray:
        return self.components(np.asarray(p, dtype=float))

    def check_point(self, p, margin: float = 0.0) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ChartError(f"expected a point with {self.dim} coordinates, got {p.shape}")
        for i in self.sphere_slots:
            a = math.fmod(p[i], math.pi)
            if min(abs(a), math.pi - abs(a)) < max(1e-3, 10 * margin):
                raise ChartError(f"{self.labels[i]}={p[i]!r} too close to the chart boundary")
        for i, (lo, hi) in (self.bounds or {}).items():
            if not lo + 2 * margin <= p[i] <= hi - 2 * margin:
                raise ChartError(f"{self.labels[i]}={p[i]!r} too close to the edge of [{lo}, {hi}]")
        return p

    # -- constructors --------------------------------------------------------

    @classmethod
    def for_surface(cls, S) -> "ChartMetric":
        """Induced metric in the chart ``(s, v_1, ..., v_{n-1})``.

        For a slice the chart is the sphere chart ``(v_1, ..., v_n)`` of the
        round sphere of radius ``f(t0)``; only the constant fiber curvature
        +1 is supported there.
        """
        n = S.n
        if S.kind == "slice":
            if S.ambient.fiber_curvature != 1:
                raise ChartError("slice oracle needs a round-sphere fiber (fiber_curvature 1)")
            r2 = S.radius**2

            def comps(p):
                return r2 * np.diag(_sphere_factors(p))

            labels = tuple(f"v{i + 1}" for i in range(n))
            return cls(n, labels, comps, sphere_slots=tuple(range(n - 1)))

        def comps(p):
            sigma = S.sigma_value(p[0])
            diag = np.empty(n)
            diag[0] = 1.0
            diag[1:] = sigma * sigma * _sphere_factors(p[1:])
            return np.diag(diag)

        labels = ("s",) + tuple(f"v{i + 1}" for i in range(n - 1))
        return cls(n, labels, comps, sphere_slots=tuple(range(1, n - 1)),
                   bounds={0: (S.s_lo, S.s_hi)})

    @classmethod
    def for_ambient(cls, a: Ambient) -> "ChartMetric":
        """Ambient metric ``dt^2 + f^2 g_M`` in the chart ``(t, x1, x2)``.

        The fiber metric is ``dx1^2 + S_c(x1)^2 dx2^2`` with ``S_c`` equal to
        ``sin``, the identity or ``sinh`` for curvature +1, 0, -1.
        """
        c = a.fiber_curvature
        warp = {1: math.sin, 0: lambda x: 1.0, -1: math.sinh}[c]

        def comps(p):
            f = a.warp_jet(p[0]).value
            return np.diag([1.0, f * f, (f * warp(p[1])) ** 2])

        slots = (1,) if c == 1 else ()
        return cls(3, ("t", "x1", "x2"), comps, sphere_slots=slots,
                   bounds={0: a.t_range})


def _sphere_factors(angles) -> np.ndarray:
    """Diagonal of the round metric in the chart ``dv1^2 + sin^2 v1 dv2^2 + ...``."""
    angles = np.asarray(angles, dtype=float)
    out = np.ones(len(angles))
    acc = 1.0
    for i in range(1, len(angles)):
        acc *= math.sin(angles[i - 1]) ** 2
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# finite differences


def _raw_derivatives(M: ChartMetric, p: np.ndarray, h: float):
    d = M.dim
    g0 = M(p)
    dg = np.empty((d, d, d))
    ddg = np.empty((d, d, d, d))
    e = np.eye(d) * h
    plus = [M(p + e[m]) for m in range(d)]
    minus = [M(p - e[m]) for m in range(d)]
    for m in range(d):
        dg[m] = (plus[m] - minus[m]) / (2 * h)
        ddg[m, m] = (plus[m] - 2 * g0 + minus[m]) / (h * h)
    for m in range(d):
        for l in range(m + 1, d):
            pp = M(p + e[m] + e[l])
            pm = M(p + e[m] - e[l])
            mp = M(p - e[m] + e[l])
            mm = M(p - e[m] - e[l])
            ddg[m, l] = ddg[l, m] = (pp - pm - mp + mm) / (4 * h * h)
    return g0, dg, ddg


def metric_derivatives(M: ChartMetric, p, step: float = DEFAULT_STEP, richardson: bool = True):
    """Metric, first and second partials; ``dg[m, i, j] = d_m g_ij``.

    With ``richardson`` the central differences at ``step`` and ``step / 2``
    are combined to cancel the leading ``O(step^2)`` error.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    p = M.check_point(p, margin=step)
    g, dg1, ddg1 = _raw_derivatives(M, p, step)
    if not richardson:
        return g, dg1, ddg1
    _, dg2, ddg2 = _raw_derivatives(M, p, step / 2)
    return g, (4 * dg2 - dg1) / 3, (4 * ddg2 - ddg1) / 3


def _inverse(g: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(g)) or abs(np.linalg.det(g)) < 1e-300:
        raise ChartError("singular metric matrix")
    return np.linalg.inv(g)


def _connection(g, dg, ddg):
    ginv = _inverse(g)
    # first kind: G1[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    G1 = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    gam = np.einsum("kl,lij->kij", ginv, G1)
    dG1 = 0.5 * (np.einsum("mijl->mlij", ddg) + np.einsum("mjil->mlij", ddg) - ddg)
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    dgam = np.einsum("mkl,lij->mkij", dginv, G1) + np.einsum("kl,mlij->mkij", ginv, dG1)
    return ginv, gam, dgam


def christoffel_fd(M: ChartMetric, p, step: float = DEFAULT_STEP) -> np.ndarray:
    """``Gamma[k, i, j] = Gamma^k_{ij}`` from finite-difference metric partials."""
    g, dg, ddg = metric_derivatives(M, p, step)
    return _connection(g, dg, ddg)[1]


def _riemann_up(g, dg, ddg):
    ginv, gam, dgam = _connection(g, dg, ddg)
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    r = (np.einsum("cadb->abcd", dgam) - np.einsum("dacb->abcd", dgam)
         + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam))
    return ginv, r


def riemann_fd(M: ChartMetric, p, step: float = DEFAULT_STEP) -> np.ndarray:
    """Fully covariant ``R_{abcd} = <R(d_c, d_d) d_b, d_a>`` in chart components."""
    g, dg, ddg = metric_derivatives(M, p, step)
    _, r = _riemann_up(g, dg, ddg)
    return np.einsum("ae,ebcd->abcd", g, r)


def _frame_scale(g: np.ndarray) -> np.ndarray:
    off = g - np.diag(np.diag(g))
    if np.max(np.abs(off)) > 1e-12 * np.max(np.abs(g)):
        raise ChartError("orthonormal-frame conversion expects a diagonal metric")
    return 1.0 / np.sqrt(np.diag(g))


def ricci_fd(M: ChartMetric, p, step: float = DEFAULT_STEP) -> np.ndarray:
    """Ricci tensor in the orthonormal frame ``e_i = d_i / |d_i|``."""
    g, dg, ddg = metric_derivatives(M, p, step)
    _, r = _riemann_up(g, dg, ddg)
    ric = np.einsum("abad->bd", r)
    sc = _frame_scale(g)
    return ric * np.outer(sc, sc)


def ricci_fd_axi(M: ChartMetric, p, k: int = 1, step: float = DEFAULT_STEP) -> AxiTensor:
    """Orthonormal Ricci as ``AxiTensor``; index 0 is the profile direction and
    ``k`` the distinguished orbit direction.  ``vv_perp`` averages the others."""
    ric = ricci_fd(M, p, step)
    d = ric.shape[0]
    diag = np.diag(ric)
    rest = [diag[i] for i in range(1, d) if i != k]
    vv_perp = float(np.mean(rest)) if rest else float(diag[k])
    return AxiTensor(float(diag[0]), float(diag[k]), vv_perp)


def sectional_fd(M: ChartMetric, p, i: int, j: int, step: float = DEFAULT_STEP) -> float:
    g, dg, ddg = metric_derivatives(M, p, step)
    _, r = _riemann_up(g, dg, ddg)
    rl = np.einsum("ae,ebcd->abcd", g, r)
    return float(rl[i, j, i, j] / (g[i, i] * g[j, j] - g[i, j] ** 2))


def scalar_fd(M: ChartMetric, p, step: float = DEFAULT_STEP) -> float:
    return float(np.trace(ricci_fd(M, p, step)))


def riemann_symmetry_residuals(M: ChartMetric, p, step: float = DEFAULT_STEP) -> dict[str, float]:
    """Symmetry defects of the FD Riemann tensor, each relative to its norm.

    Exactly flat metrics have a zero tensor; then the raw defects are returned.
    """
    R = riemann_fd(M, p, step)
    norm = float(np.linalg.norm(R))
    scale = norm if norm > 0 else 1.0
    return {
        "norm": norm,
        "antisym_first": float(np.linalg.norm(R + np.einsum("abcd->bacd", R))) / scale,
        "antisym_last": float(np.linalg.norm(R + np.einsum("abcd->abdc", R))) / scale,
        "pair": float(np.linalg.norm(R - np.einsum("abcd->cdab", R))) / scale,
        "bianchi": float(np.linalg.norm(R + np.einsum("abcd->acdb", R)
                                        + np.einsum("abcd->adbc", R))) / scale,
    }


def coordinate_laplacian_fd(M: ChartMetric, k: int, p, step: float = DEFAULT_STEP) -> float:
    """Laplace-Beltrami of the coordinate function ``x^k``: ``-g^{ij} Gamma^k_ij``."""
    g, dg, ddg = metric_derivatives(M, p, step)
    ginv, gam, _ = _connection(g, dg, ddg)
    return float(-np.einsum("ij,ij->", ginv, gam[k]))


def fiber_coordinate_laplacian(S, k: int, p, step: float = DEFAULT_STEP) -> float:
    """Laplacian on the surface of the orbit angle ``v_k`` (1-based) at ``p = (s, v...)``."""
    if S.kind != "rotational":
        raise SurfaceError("fiber coordinates are defined on rotational hypersurfaces")
    if not 1 <= k <= S.n - 1:
        raise ChartError(f"fiber index k={k} outside 1..{S.n - 1}")
    return coordinate_laplacian_fd(ChartMetric.for_surface(S), k, p, step)


def oracle_points(S, count: int, seed: int = 0) -> list[np.ndarray]:
    """Deterministic interior chart points for oracle runs."""
    rng = np.random.default_rng(seed)
    n = S.n
    pts = []
    if S.kind == "slice":
        for _ in range(count):
            v = rng.uniform(ANGLE_GUARD, math.pi - ANGLE_GUARD, n)
            v[-1] = rng.uniform(0, 2 * math.pi)
            pts.append(v)
        return pts
    margin = 0.02 * (S.s_hi - S.s_lo)
    for _ in range(count):
        s = rng.uniform(S.s_lo + margin, S.s_hi - margin)
        v = rng.uniform(ANGLE_GUARD, math.pi - ANGLE_GUARD, n - 1)
        if n > 2:
            v[-1] = rng.uniform(0, 2 * math.pi)
        else:
            v[0] = rng.uniform(0, 2 * math.pi)
        pts.append(np.concatenate(([s], v)))
    return pts


# ---------------------------------------------------------------------------
# closed forms on ds^2 + sigma^2 g_{S^{n-1}}


def ricci_closed(S, s: float) -> AxiTensor:
    """Ricci curvature of the induced metric from ``sigma`` and its derivatives."""
    g = S.local(s)
    n = S.n
    if S.kind == "slice":
        return AxiTensor.scalar((n - 1) / S.radius**2)
    q = g.d2sigma / g.sigma
    ss = -(n - 1) * q
    vv = -q + (n - 2) * (1.0 - g.dsigma**2) / g.sigma**2
    return AxiTensor.radial(ss, vv)


def _as_jet(w) -> Jet:
    return w if isinstance(w, Jet) else Jet(*w)


def hessian_radial(S, w, s: float) -> AxiTensor:
    """Hessian of a function of ``s`` alone, given its jet ``(w, w', w'')`` at ``s``."""
    if S.kind != "rotational":
        raise SurfaceError("radial functions live on rotational hypersurfaces")
    w = _as_jet(w)
    g = S.local(s)
    k = g.dsigma / g.sigma * w.d1
    return AxiTensor.radial(w.d2, k)


def laplacian_radial(S, w, s: float) -> float:
    return hessian_radial(S, w, s).trace(S.n)


def hessian_height_intrinsic(S, s: float) -> AxiTensor:
    """Hessian of the height function computed on the induced metric."""
    if S.kind == "slice":
        return AxiTensor.scalar(0.0)
    g = S.local(s)
    return hessian_radial(S, Jet(g.h, g.dh, g.d2h), s)

"""Gradient Einstein-type structures on rotational hypersurfaces and slices.

A structure is the data ``(alpha, u, mu, lambda)`` on a surface whose
potential is the height function ``h``.  The defining system is

    Ric - alpha du(x)du + Hess h - mu dh(x)dh = lambda g,
    tau_g u = du(grad h).

All tensors are ``AxiTensor`` values in the adapted orthonormal frame.  The
tension equation is carried under two conventions:

* ``A``: ``tau_g u`` is the full Laplace-Beltrami operator ``Delta u``;
* ``B``: the radial ODE ``u'' = sqrt(1 - theta^2) u'`` that drops the
  ``(n-1)(sigma'/sigma) u'`` part of the Laplacian.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, TypeVar, Union

import numpy as np
from scipy.interpolate import BPoly

from . import oracle
from .expr import Expression, Jet, parse_expr
from .rotational import AxiTensor, SurfaceError, shape_operator, traceless_phi_norm2

__all__ = [
    "SOLVE",
    "UMap",
    "EinsteinTypeStructure",
    "EquationResidual",
    "ResidualReport",
    "StructureError",
    "SingularSystemError",
    "InconsistentSystemError",
    "ric_u",
    "tensor_residual",
    "prop1_residual",
    "residual_eq0001",
    "residual_prop1",
    "hessian_height_extrinsic",
    "ambient_ricci_term",
    "ricci_extrinsic",
    "solve_lambda_mu",
    "vv_k_consistency",
    "solve_u_base",
    "tau_residuals",
    "u_scalar_curvature",
    "bochner_eval",
    "hypothesis_margins",
    "parallel_map",
    "default_fiber_point",
]

SOLVE = "solve"
DEFAULT_TOL = 1e-6
MODES = ("constant", "base-radial", "fiber-linear", "isometric-identity")

T = TypeVar("T")
R = TypeVar("R")


class StructureError(ValueError):
    def __init__(self, message: str, s: float | None = None):
        super().__init__(message if s is None else f"{message} (s={s!r})")
        self.s = s


class SingularSystemError(StructureError, ArithmeticError):
    pass


class InconsistentSystemError(StructureError, ArithmeticError):
    pass


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Ordered map, threaded when ``ETL_THREADS`` asks for more than one worker."""
    items = list(items)
    raw = os.environ.get("ETL_THREADS", "").strip()
    try:
        threads = int(raw) if raw else 1
    except ValueError:
        raise StructureError(f"ETL_THREADS must be an integer, got {raw!r}") from None
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def default_fiber_point(n: int) -> np.ndarray:
    """Angles used when a fiber-dependent quantity needs a concrete ``v``."""
    return np.full(n - 1, math.pi / 3)


# ---------------------------------------------------------------------------
# the map u


@dataclass(frozen=True)
class UMap:
    """A real-valued map ``u`` on the surface, or an identity map onto a round sphere.

    ``base-radial`` maps depend on ``s`` only and are given either by an
    expression in ``s`` or by :func:`solve_u_base`.  ``fiber-linear`` maps are
    ``c4 * v_k + c5``.  ``isometric-identity`` has ``u*<,> = scale * g``.
    """

    mode: str
    value: float = 0.0
    expr: Expression | None = None
    c4: float = 0.0
    c5: float = 0.0
    k: int = 1
    scale: float = 1.0
    convention: str = "B"
    _sampled: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise StructureError(f"unknown u mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "base-radial":
            if (self.expr is None) == (self._sampled is None):
                raise StructureError("base-radial u needs exactly one of an expression or samples")
            if self.expr is not None and self.expr.var != "s":
                raise StructureError("base-radial u must be written in the variable 's'")
        if self.mode == "fiber-linear" and self.k < 1:
            raise StructureError(f"fiber index k must be >= 1, got {self.k}")
        if self.convention not in ("A", "B"):
            raise StructureError(f"convention must be 'A' or 'B', got {self.convention!r}")

    @classmethod
    def constant(cls, value: float = 0.0) -> "UMap":
        return cls("constant", value=float(value))

    @classmethod
    def radial(cls, text: str | Expression) -> "UMap":
        e = parse_expr(text, "s") if isinstance(text, str) else text
        return cls("base-radial", expr=e, convention="B")

    @classmethod
    def fiber_linear(cls, c4: float, k: int = 1, c5: float = 0.0) -> "UMap":
        return cls("fiber-linear", c4=float(c4), c5=float(c5), k=int(k))

    @classmethod
    def identity(cls, scale: float = 1.0) -> "UMap":
        return cls("isometric-identity", scale=float(scale))

    def check_surface(self, S) -> None:
        n = S.n
        if self.mode == "fiber-linear":
            if S.kind != "rotational":
                raise StructureError("fiber-linear u needs a rotational hypersurface")
            if not 1 <= self.k <= n - 1:
                raise StructureError(f"fiber index k={self.k} outside 1..{n - 1}")
        if self.mode == "base-radial" and S.kind != "rotational":
            raise StructureError("base-radial u needs a rotational hypersurface")

    def radial_jet(self, S, s: float) -> Jet:
        """``(u, u', u'')`` for maps depending on ``s`` only; zero jet otherwise."""
        if self.mode != "base-radial":
            return Jet(self.value if self.mode == "constant" else 0.0, 0.0, 0.0)
        if self.expr is not None:
            return self.expr.jet(s)
        spline, c2, n_exp = self._sampled
        g = S.local(s)
        d1 = c2 * math.exp(g.h) * g.sigma ** n_exp
        d2 = d1 * (g.dh + n_exp * g.dsigma / g.sigma)
        return Jet(float(spline(s)), d1, d2)

    def fiber_factor(self, v) -> float:
        """``prod_{j<k} sin^2 v_j``, the chart factor of ``|d/dv_k|^2 / sigma^2``."""
        if v is None:
            return 1.0
        p = 1.0
        for j in range(self.k - 1):
            p *= math.sin(v[j]) ** 2
        return p

    def du_dot_du(self, S, s: float, v=None) -> AxiTensor:
        """``du (x) du`` in the orthonormal frame (``u*<,>`` for the identity)."""
        n = S.n
        if self.mode == "constant":
            return AxiTensor.scalar(0.0)
        if self.mode == "isometric-identity":
            return AxiTensor.scalar(self.scale)
        if self.mode == "base-radial":
            d1 = self.radial_jet(S, s).d1
            return AxiTensor(d1 * d1, 0.0, 0.0)
        sigma = S.local(s).sigma
        return AxiTensor.orbit_k(self.c4**2 / (sigma**2 * self.fiber_factor(v)), n)

    def grad_norm2(self, S, s: float, v=None) -> float:
        return self.du_dot_du(S, s, v).trace(S.n)

    def laplacian(self, S, s: float, v=None) -> float:
        """``Delta u`` (the tension field of a real-valued map)."""
        if self.mode in ("constant", "isometric-identity"):
            return 0.0
        if self.mode == "base-radial":
            return oracle.laplacian_radial(S, self.radial_jet(S, s), s)
        v = default_fiber_point(S.n) if v is None else v
        sigma = S.local(s).sigma
        k = self.k
        cot = math.cos(v[k - 1]) / math.sin(v[k - 1])
        return self.c4 * (S.n - 1 - k) * cot / (sigma**2 * self.fiber_factor(v))

    def to_config(self) -> dict:
        if self.mode == "constant":
            return {"mode": "constant", "value": self.value}
        if self.mode == "isometric-identity":
            return {"mode": "isometric-identity", "scale": self.scale}
        if self.mode == "fiber-linear":
            return {"mode": "fiber-linear", "c4": self.c4, "c5": self.c5, "k": self.k}
        if self.expr is not None:
            return {"mode": "base-radial", "expr": self.expr.source}
        _, c2, n_exp = self._sampled
        return {"mode": "base-radial", "solve": "radial-ODE" if n_exp == 0 else "full-Laplacian",
                "c2": c2}


Coefficient = Union[Expression, float, str]


def _coef(value) -> Coefficient:
    if isinstance(value, str):
        if value.strip() == SOLVE:
            return SOLVE
        return parse_expr(value, "s")
    if isinstance(value, Expression):
        if value.var != "s":
            raise StructureError("mu and lambda must be written in the variable 's'")
        return value
    return float(value)


@dataclass(frozen=True)
class EinsteinTypeStructure:
    surface: object
    alpha: float
    u: UMap
    mu: Coefficient = SOLVE
    lam: Coefficient = SOLVE

    def __post_init__(self):
        if not self.alpha > 0:
            raise StructureError(f"alpha must be positive, got {self.alpha!r}")
        object.__setattr__(self, "mu", _coef(self.mu))
        object.__setattr__(self, "lam", _coef(self.lam))
        self.u.check_surface(self.surface)

    @property
    def n(self) -> int:
        return self.surface.n

    def lambda_mu(self, s: float, v=None) -> tuple[float, float]:
        lam = _given(self.lam, s)
        mu = _given(self.mu, s)
        if lam is None or mu is None:
            ls, ms = solve_lambda_mu(self.surface, self.alpha, self.u, s, v, lam=lam)
            lam = ls if lam is None else lam
            mu = ms if mu is None else mu
        return lam, mu

    def lambda_jet(self, s: float, v=None, step: float = 1e-5) -> Jet:
        """``lambda`` with its first derivative; solver output is differenced."""
        if isinstance(self.lam, Expression):
            return self.lam.jet(s)
        if isinstance(self.lam, float):
            return Jet(self.lam, 0.0, 0.0)
        S = self.surface
        lam0 = self.lambda_mu(s, v)[0]
        if S.kind == "slice":
            return Jet(lam0, 0.0, 0.0)
        lo, hi = max(S.s_lo, s - step), min(S.s_hi, s + step)
        d1 = (self.lambda_mu(hi, v)[0] - self.lambda_mu(lo, v)[0]) / (hi - lo)
        return Jet(lam0, d1, math.nan)

    def with_coefficients(self, mu=None, lam=None) -> "EinsteinTypeStructure":
        return EinsteinTypeStructure(self.surface, self.alpha, self.u,
                                     self.mu if mu is None else mu,
                                     self.lam if lam is None else lam)


def _given(c: Coefficient, s: float) -> float | None:
    if isinstance(c, Expression):
        return c(s)
    if isinstance(c, float):
        return c
    return None


# ---------------------------------------------------------------------------
# pointwise tensors


def _dh_dh(g) -> AxiTensor:
    return AxiTensor(g.grad_h2, 0.0, 0.0)


def ric_u(st: EinsteinTypeStructure, s: float, v=None) -> AxiTensor:
    """``Ric - alpha u*<,>``; ``v`` matters only for a fiber-linear ``u`` with ``k > 1``."""
    S = st.surface
    return oracle.ricci_closed(S, s) - st.alpha * st.u.du_dot_du(S, s, v)


def hessian_height_extrinsic(S, s: float) -> AxiTensor:
    """``Hess h = (f'/f)(g - dh(x)dh) + theta A`` from the immersion data."""
    g = S.local(s)
    return (AxiTensor.scalar(g.lf1) - g.lf1 * _dh_dh(g)) + g.theta * shape_operator(S, s)


def ambient_ricci_term(S, s: float) -> AxiTensor:
    """Sum of ambient sectional curvatures of the planes ``(X, E_i)`` for ``X``
    along each frame direction, written through ``c``, ``(log f)'``, ``(log f)''``."""
    g = S.local(s)
    n = S.n
    c = S.ambient.fiber_curvature
    f2 = g.f * g.f
    gh2 = g.grad_h2

    def term(x_dot_grad_h2: float) -> float:
        return (c / f2 * ((n - 1) - (n - 2) * x_dot_grad_h2 - gh2)
                + g.lf1**2 * (gh2 - (n - 1))
                - (n - 2) * g.lf2 * x_dot_grad_h2
                - g.d2f / g.f * gh2)

    return AxiTensor.radial(term(gh2), term(0.0))


def ricci_extrinsic(S, s: float) -> AxiTensor:
    """Ricci curvature from the Gauss equation: ambient term + ``nH A - A^2``."""
    a = shape_operator(S, s)
    n = S.n
    nh = a.trace(n)
    amb = ambient_ricci_term(S, s)
    return AxiTensor(amb.ss + nh * a.ss - a.ss**2,
                     amb.vv_k + nh * a.vv_k - a.vv_k**2,
                     amb.vv_perp + nh * a.vv_perp - a.vv_perp**2)


def tensor_residual(st: EinsteinTypeStructure, s: float, v=None,
                    lam_mu: tuple[float, float] | None = None) -> AxiTensor:
    """``Ric^u + Hess h - mu dh(x)dh - lambda g`` with the intrinsic Hessian."""
    S = st.surface
    lam, mu = st.lambda_mu(s, v) if lam_mu is None else lam_mu
    g = S.local(s)
    hess = oracle.hessian_height_intrinsic(S, s)
    return ric_u(st, s, v) + hess - mu * _dh_dh(g) - AxiTensor.scalar(lam)


def prop1_residual(st: EinsteinTypeStructure, s: float, v=None,
                   lam_mu: tuple[float, float] | None = None) -> AxiTensor:
    """``Ric^u - [(lambda - f'/f) g + (mu + f'/f) dh(x)dh - theta A]``."""
    S = st.surface
    lam, mu = st.lambda_mu(s, v) if lam_mu is None else lam_mu
    g = S.local(s)
    rhs = (AxiTensor.scalar(lam - g.lf1) + (mu + g.lf1) * _dh_dh(g)
           - g.theta * shape_operator(S, s))
    return ric_u(st, s, v) - rhs


def tau_residuals(st: EinsteinTypeStructure, s: float, v=None) -> dict[str, float]:
    """Absolute tension-equation residuals under conventions A and B."""
    S = st.surface
    u = st.u
    if u.mode == "base-radial":
        g = S.local(s)
        j = u.radial_jet(S, s)
        target = j.d1 * g.dh
        return {"A": abs(oracle.laplacian_radial(S, j, s) - target),
                "B": abs(j.d2 - target)}
    # du(grad h) vanishes: grad h is radial and u has no radial derivative
    r = abs(u.laplacian(S, s, v))
    return {"A": r, "B": r}


def solve_lambda_mu(S, alpha: float, u: UMap, s: float, v=None,
                    lam: float | None = None, singular_tol: float = 1e-12) -> tuple[float, float]:
    """``(lambda, mu)`` zeroing the ``ss`` and ``vv_perp`` components at ``s``.

    The ``vv_perp`` equation fixes ``lambda``; the ``ss`` equation then fixes
    ``mu`` with coefficient ``1 - theta^2``.  On a slice ``dh = 0`` so ``mu``
    is undetermined and reported as 0.  A supplied ``lam`` replaces the solved one.
    """
    st = EinsteinTypeStructure(S, alpha, u, 0.0, 0.0)
    g = S.local(s)
    rc = ric_u(st, s, v)
    hess = oracle.hessian_height_intrinsic(S, s)
    lam_s = rc.vv_perp + hess.vv_perp if lam is None else lam
    if S.kind == "slice":
        return lam_s, 0.0
    det = g.grad_h2
    if det < singular_tol:
        raise SingularSystemError(f"singular (lambda, mu) system: 1 - theta^2 = {det!r}", s)
    mu = (rc.ss + hess.ss - lam_s) / det
    return lam_s, mu


def vv_k_consistency(S, alpha: float, u: UMap, s: float, v=None, tol: float | None = None) -> float:
    """Signed ``vv_k`` residual at the solved ``(lambda, mu)``.

    With ``tol`` set, a residual above it raises ``InconsistentSystemError``.
    """
    lm = solve_lambda_mu(S, alpha, u, s, v)
    st = EinsteinTypeStructure(S, alpha, u, lm[1], lm[0])
    r = tensor_residual(st, s, v, lm).vv_k
    if tol is not None and abs(r) > tol:
        raise InconsistentSystemError(f"vv_k equation inconsistent: residual {r!r}", s)
    return r


def solve_u_base(S, c2: float, c3: float, convention: str = "radial-ODE", order: int = 8) -> UMap:
    """Radial solution of the tension equation with ``u(s_lo) = c3``.

    ``radial-ODE`` integrates ``u' = c2 e^zeta``; ``full-Laplacian`` integrates
    ``u' = c2 e^zeta sigma^(1-n)``, the exact solution of ``Delta u = zeta' u'``.
    Node values use a fixed Gauss-Legendre rule per grid segment.
    """
    if S.kind != "rotational":
        raise StructureError("solve_u_base needs a rotational hypersurface")
    if convention == "radial-ODE":
        n_exp, conv = 0, "B"
    elif convention == "full-Laplacian":
        n_exp, conv = 1 - S.n, "A"
    else:
        raise StructureError(f"unknown convention {convention!r}")

    def du(s: float) -> float:
        if n_exp == 0:
            z, _ = S.state(s)
            return c2 * math.exp(float(z))
        g = S.local(s)
        if not g.sigma > 1e-300:
            raise SurfaceError("sigma vanishes under the full-Laplacian convention", s)
        return c2 * math.exp(g.h) * g.sigma**n_exp

    x, w = np.polynomial.legendre.leggauss(order)
    grid = S.grid
    vals = [float(c3)]
    acc = [float(c3)]
    for a, b in zip(grid[:-1], grid[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        seg = math.fsum(wi * du(mid + half * xi) for xi, wi in zip(x, w)) * half
        acc.append(seg)
        vals.append(math.fsum(acc))
    tmp = UMap("base-radial", convention=conv,
               _sampled=(lambda s: 0.0, float(c2), n_exp))
    derivs = np.empty((len(grid), 3))
    for i, s in enumerate(grid):
        j = tmp.radial_jet(S, float(s))
        derivs[i] = (vals[i], j.d1, j.d2)
    spline = BPoly.from_derivatives(grid, derivs)
    return UMap("base-radial", convention=conv, _sampled=(spline, float(c2), n_exp))


# ---------------------------------------------------------------------------
# reports


@dataclass
class EquationResidual:
    """Absolute residuals of one equation over a grid."""

    equation: str
    s: np.ndarray
    components: dict[str, np.ndarray]
    tolerance: float
    gated: tuple[str, ...]
    convention: str | None = None
    gate: bool = True
    signed: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def max(self) -> float:
        vals = [np.max(self.components[c]) for c in self.gated if len(self.components[c])]
        return float(max(vals)) if vals else 0.0

    @property
    def mean(self) -> float:
        if not len(self.s):
            return 0.0
        return float(np.mean([np.mean(self.components[c]) for c in self.gated]))

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max) and self.max < self.tolerance)

    def to_json(self) -> dict:
        out = {
            "equation": self.equation,
            "grid": [{"s": float(s), "components": {k: float(v[i]) for k, v in self.components.items()}}
                     for i, s in enumerate(self.s)],
            "gated": list(self.gated),
            "gate": self.gate,
            "max": self.max,
            "mean": self.mean,
            "pass": self.passed,
            "tolerance": self.tolerance,
        }
        if self.convention is not None:
            out["convention"] = self.convention
        return out


@dataclass
class ResidualReport:
    form: str
    equations: list[EquationResidual]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.equations if e.gate)

    def get(self, equation: str, convention: str | None = None) -> EquationResidual:
        for e in self.equations:
            if e.equation == equation and e.convention == convention:
                return e
        raise KeyError((equation, convention))

    def to_json(self) -> dict:
        return {"form": self.form, "tolerance": self.tolerance, "pass": self.passed,
                "equations": [e.to_json() for e in self.equations]}


def _grid(st: EinsteinTypeStructure, grid) -> np.ndarray:
    if grid is None:
        return np.array(st.surface.grid, dtype=float)
    return np.atleast_1d(np.asarray(grid, dtype=float))


def _report(st, grid, tol, convention, v, form: str,
            point_fn: Callable) -> ResidualReport:
    if convention not in ("A", "B", "both"):
        raise StructureError(f"convention must be A, B or both, got {convention!r}")
    S = st.surface
    s_arr = _grid(st, grid)
    if v is None and st.u.mode == "fiber-linear":
        v = default_fiber_point(S.n)

    def one(s: float):
        t = point_fn(st, s, v)
        return t, tau_residuals(st, s, v)

    rows = parallel_map(one, [float(s) for s in s_arr])
    signed = {c: np.array([getattr(r[0], c) for r in rows]) for c in ("ss", "vv_k", "vv_perp")}
    tensor = EquationResidual(
        "tensor", s_arr, {c: np.abs(a) for c, a in signed.items()}, tol,
        gated=("ss", "vv_perp"), signed=signed)
    declared = st.u.convention
    eqs = [tensor]
    for conv in ("A", "B"):
        vals = np.array([r[1][conv] for r in rows])
        gate = conv == declared if convention == "both" else conv == convention
        eqs.append(EquationResidual("tau", s_arr, {"value": vals}, tol, gated=("value",),
                                    convention=conv, gate=gate))
    return ResidualReport(form, eqs, tol)


def residual_eq0001(st: EinsteinTypeStructure, grid=None, tol: float = DEFAULT_TOL,
                    convention: str = "both", v=None) -> ResidualReport:
    """Residuals of the defining system with the intrinsic Hessian of ``h``.

    ``convention='both'`` reports A and B and gates the one ``u`` declares.
    """
    return _report(st, grid, tol, convention, v, "eq0001", tensor_residual)


def residual_prop1(st: EinsteinTypeStructure, grid=None, tol: float = DEFAULT_TOL,
                   convention: str = "both", v=None) -> ResidualReport:
    """Same report for the extrinsic form of the tensor equation."""
    return _report(st, grid, tol, convention, v, "prop1", prop1_residual)


# ---------------------------------------------------------------------------
# scalar identities


def u_scalar_curvature(st: EinsteinTypeStructure, s: float, v=None) -> tuple[float, float, float]:
    """``R^u`` three ways: intrinsic, trace of the structure equation, Gauss equation."""
    S = st.surface
    n = S.n
    g = S.local(s)
    gu = st.u.grad_norm2(S, s, v)
    intrinsic = oracle.ricci_closed(S, s).trace(n) - st.alpha * gu

    lam, mu = st.lambda_mu(s, v)
    a = shape_operator(S, s)
    H = a.trace(n) / n
    trace = n * (lam - g.lf1) + (mu + g.lf1) * g.grad_h2 - n * g.theta * H

    c = S.ambient.fiber_curvature
    gh2 = g.grad_h2
    extrinsic = (c / (g.f * g.f) * (n - 1) * (n - 2 * gh2)
                 + n * g.lf1**2 * (gh2 - (n - 1))
                 - (n - 2) * g.lf2 * gh2
                 - n * g.d2f / g.f * gh2
                 + n * n * H * H - a.norm2(n)
                 - st.alpha * gu)
    return intrinsic, trace, extrinsic


@dataclass(frozen=True)
class BochnerPoint:
    s: float
    lhs: float
    rhs: float
    applicable: bool
    reason: str

    def as_dict(self) -> dict:
        return {"s": self.s, "lhs": self.lhs, "rhs": self.rhs,
                "applicable": self.applicable, "reason": self.reason}


def _mu_constant(st: EinsteinTypeStructure, tol: float, v=None) -> bool:
    if isinstance(st.mu, float):
        return True
    vals = [st.lambda_mu(float(s), v)[1] for s in st.surface.grid]
    return bool(max(vals) - min(vals) < tol)


def bochner_eval(st: EinsteinTypeStructure, s: float, tol: float = DEFAULT_TOL, v=None,
                 mu_constant: bool | None = None) -> BochnerPoint:
    """Both sides of the weighted Bochner identity for ``|grad h|^2``.

    The identity is asserted only where the tensor residual is below ``tol``
    and ``mu`` is constant on the grid; elsewhere ``applicable`` is False.
    """
    S = st.surface
    n = S.n
    g = S.local(s)
    if S.kind == "slice":
        lhs = 0.0
    else:
        th, dth, d2th = g.theta, g.dtheta, g.d2theta
        w1 = -2.0 * th * dth
        w2 = -2.0 * (dth * dth + th * d2th)
        lap_w = oracle.laplacian_radial(S, Jet(g.grad_h2, w1, w2), s)
        lhs = 0.5 * (lap_w - g.dh * w1)

    lam_j = st.lambda_jet(s, v)
    lam, mu = st.lambda_mu(s, v)
    hess = oracle.hessian_height_intrinsic(S, s)
    tau = st.u.laplacian(S, s, v)
    ru = u_scalar_curvature(st, s, v)[0]
    gh2 = g.grad_h2
    dlam_term = (n - 2) * lam_j.d1 * g.dh if g.dh != 0.0 else 0.0
    rhs = (hess.norm2(n) + st.alpha * tau * tau
           + (2 * mu * lam * n - lam - 2 * mu * ru) * gh2
           + mu * (2 * mu - 1) * gh2 * gh2
           - dlam_term)

    if mu_constant is None:
        mu_constant = _mu_constant(st, tol, v)
    resid = tensor_residual(st, s, v, (lam, mu))
    ok_res = max(abs(resid.ss), abs(resid.vv_k), abs(resid.vv_perp)) < tol
    reasons = []
    if not ok_res:
        reasons.append("structure residual above tolerance")
    if not mu_constant:
        reasons.append("mu is not constant")
    return BochnerPoint(float(s), lhs, rhs, ok_res and mu_constant, "; ".join(reasons))


def hypothesis_margins(st: EinsteinTypeStructure, grid=None, v=None) -> list[dict]:
    """Signed margins of the curvature and mean-curvature hypotheses, per grid point.

    Positive ``mean_curvature_margin`` means ``0 <= H <= (log f)'``;
    positive ``lambda_margin`` means the lower bound on ``lambda`` holds;
    ``rho_outside`` reports membership of the ss principal curvature in the
    complement of the open root interval when ``discriminant > 0``.
    """
    S = st.surface
    n = S.n
    out = []
    for s in _grid(st, grid):
        s = float(s)
        g = S.local(s)
        a = shape_operator(S, s)
        H = a.trace(n) / n
        lam, mu = st.lambda_mu(s, v)
        base = g.lf1 - (n - 1) * g.d2f / g.f
        b = n * H + g.theta
        disc = b * b + 4.0 * (base - lam)
        rho = a.ss
        if disc > 0:
            r = math.sqrt(disc)
            lo, hi = (b - r) / 2, (b + r) / 2
            outside = rho <= lo or rho >= hi
        else:
            lo = hi = math.nan
            outside = None
        out.append({
            "s": s,
            "H": H,
            "dlogf": g.lf1,
            "mean_curvature_margin": min(H, g.lf1 - H),
            "lambda_margin": lam - (base + abs(mu + g.lf1) + H * b),
            "discriminant": disc,
            "rho": rho,
            "root_lo": lo,
            "root_hi": hi,
            "rho_outside": outside,
            "mu_margin": mu + g.lf1,
            "phi_norm2": traceless_phi_norm2(S, s),
            "fiber_margin": S.ambient.curvature_condition_margin(g.h),
        })
    return out


"""Tabular reports built from a surface and structure."""

from __future__ import annotations

import math

import numpy as np

from . import oracle
from .rotational import AxiTensor
from .structure import (EinsteinTypeStructure, hessian_height_extrinsic, hypothesis_margins,
                        ricci_extrinsic)

__all__ = ["oracle_report", "solve_rows", "SOLVE_HEADER", "margin_rows", "MARGIN_HEADER",
           "FD_MAX_DIM", "RICCI_RTOL", "HESS_TOL", "SYM_TOL", "AMBIENT_TOL"]

FD_MAX_DIM = 3
RICCI_RTOL = 1e-5
HESS_TOL = 1e-7
SYM_TOL = 1e-6
AMBIENT_TOL = 1e-6


def _record(s, quantity, closed, value, tol) -> dict:
    err = abs(closed - value)
    return {"s": float(s), "quantity": quantity, "closed_form": float(closed),
            "oracle": float(value), "abs_err": float(err), "tol": float(tol),
            "pass": bool(err <= tol)}


def _axi_records(s, name, closed: AxiTensor, other: AxiTensor, tol: float) -> list[dict]:
    return [_record(s, f"{name}.{c}", getattr(closed, c), getattr(other, c), tol)
            for c in ("ss", "vv_k", "vv_perp")]


def oracle_report(S, count: int = 20, seed: int = 0, step: float = oracle.DEFAULT_STEP) -> dict:
    """Closed forms against the finite-difference oracle and the Gauss equation.

    Ricci tolerances are relative, ``RICCI_RTOL * max(1, |Ric|)``.  The
    chart-based quantities are skipped for ``n > FD_MAX_DIM``.
    """
    n = S.n
    records: list[dict] = []
    pts = oracle.oracle_points(S, count, seed)
    fd = n <= FD_MAX_DIM
    M = oracle.ChartMetric.for_surface(S) if fd and (S.kind == "rotational"
                                                     or S.ambient.fiber_curvature == 1) else None
    for p in pts:
        s = float(p[0]) if S.kind == "rotational" else 0.0
        closed = oracle.ricci_closed(S, s)
        scale = max(1.0, abs(closed.ss), abs(closed.vv_k), abs(closed.vv_perp))
        records += _axi_records(s, "ricci_gauss", closed, ricci_extrinsic(S, s), RICCI_RTOL * scale)
        records += _axi_records(s, "hess_h_extrinsic", oracle.hessian_height_intrinsic(S, s),
                                hessian_height_extrinsic(S, s), HESS_TOL)
        if M is None:
            continue
        records += _axi_records(s, "ricci_fd", closed, oracle.ricci_fd_axi(M, p, 1, step),
                                RICCI_RTOL * scale)
        for name, val in oracle.riemann_symmetry_residuals(M, p, step).items():
            if name != "norm":
                records.append(_record(s, f"riemann_{name}", 0.0, val, SYM_TOL))
        if S.kind == "rotational":
            records.append(_record(s, f"laplacian_v{n - 1}", 0.0,
                                   oracle.fiber_coordinate_laplacian(S, n - 1, p, step), 1e-5))

    rng = np.random.default_rng(seed + 1)
    a = S.ambient
    A = oracle.ChartMetric.for_ambient(a)
    ts = [g.h for g in S.nodes()]
    for _ in range(count):
        t = float(rng.choice(ts))
        q = [t, rng.uniform(oracle.ANGLE_GUARD, math.pi - oracle.ANGLE_GUARD), rng.uniform(0, 2 * math.pi)]
        k_tv, k_vw = a.ambient_sectional(t)
        records.append(_record(t, "ambient_K_tV", k_tv, oracle.sectional_fd(A, q, 0, 1, step), AMBIENT_TOL))
        records.append(_record(t, "ambient_K_VW", k_vw, oracle.sectional_fd(A, q, 1, 2, step), AMBIENT_TOL))

    worst = max((r["abs_err"] / r["tol"] for r in records), default=0.0)
    return {"n": n, "points": count, "step": step, "fd_chart": M is not None,
            "records": records, "pass": all(r["pass"] for r in records), "worst_ratio": worst}


SOLVE_HEADER = ("s", "lambda", "mu", "u", "du", "d2u")


def solve_rows(st: EinsteinTypeStructure) -> list[tuple]:
    S = st.surface
    rows = []
    for s in S.grid:
        s = float(s)
        lam, mu = st.lambda_mu(s)
        j = st.u.radial_jet(S, s)
        rows.append((s, lam, mu, j.value, j.d1, j.d2))
    return rows


MARGIN_HEADER = ("s", "H", "dlogf", "mean_curvature_margin", "lambda_margin", "discriminant",
                 "rho", "root_lo", "root_hi", "rho_outside", "mu_margin", "phi_norm2", "fiber_margin")


def margin_rows(st: EinsteinTypeStructure) -> list[tuple]:
    rows = []
    for m in hypothesis_margins(st):
        out = []
        for k in MARGIN_HEADER:
            v = m[k]
            out.append("" if v is None else v)
        rows.append(tuple(out))
    return rows

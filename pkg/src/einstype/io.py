"""Deterministic CSV/JSON output and surface exports."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .rotational import SurfaceError, sphere_chart

__all__ = ["fmt", "write_csv", "write_json", "to_jsonable", "profile_rows", "mesh_rows"]


def fmt(x) -> str:
    """17 significant digits, so values round-trip exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
            n += 1
    return n


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: str | Path, obj) -> None:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8", newline="\n")


PROFILE_HEADER = ("s", "zeta", "beta", "sigma", "theta", "h")


def profile_rows(S) -> list[tuple]:
    rows = []
    for g in S.nodes():
        beta = g.sigma / g.f
        rows.append((g.s, g.h, beta, g.sigma, g.theta, g.h))
    return rows


def mesh_header(n: int) -> list[str]:
    return ["s"] + [f"v{i + 1}" for i in range(n - 1)] + [f"x{i}" for i in range(n + 1)]


def mesh_rows(S, s_points: int, v_points: int) -> list[tuple]:
    """Points of the embedded surface, row-major in ``(s, v1, v2, ...)``.

    The last angle sweeps ``[0, 2 pi)``; polar angles sweep ``[0, pi]``.
    """
    if S.kind != "rotational":
        raise SurfaceError("mesh export needs a rotational hypersurface")
    n = S.n
    s_vals = np.linspace(S.s_lo, S.s_hi, s_points)
    axes = []
    for i in range(n - 1):
        if i == n - 2:
            axes.append(np.arange(v_points) * (2 * math.pi / v_points))
        else:
            axes.append(np.linspace(0.0, math.pi, v_points))
    vs = np.array(np.meshgrid(*axes, indexing="ij")).reshape(n - 1, -1).T
    charts = [sphere_chart(v) for v in vs]
    zeta, beta = S.state(s_vals)
    rows = []
    for s, z, b in zip(s_vals, zeta, beta):
        for v, x in zip(vs, charts):
            rows.append((float(s), *map(float, v), float(z), *map(float, b * x)))
    return rows

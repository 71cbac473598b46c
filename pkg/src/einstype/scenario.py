"""JSON scenario configs: validation and construction of surface + structure."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .ambient import Ambient, AmbientError
from .expr import ExprError, parse_expr
from .rotational import AngleProfile, SliceSurface, SurfaceError, build_surface
from .structure import SOLVE, EinsteinTypeStructure, StructureError, UMap, solve_u_base

__all__ = ["ConfigError", "Scenario", "load_config", "build_scenario", "DEFAULTS"]

DEFAULTS = {
    "grid": {"points": 201, "tolerance": 1e-10},
    "verify": {"tol": 1e-6, "convention": "both"},
    "outputs": {"mesh": {"s_points": 100, "v_points": 60}},
}


class ConfigError(ValueError):
    """Invalid scenario; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class Scenario:
    config: dict
    surface: object
    structure: EinsteinTypeStructure

    @property
    def tol(self) -> float:
        return float(self.config["verify"]["tol"])

    @property
    def convention(self) -> str:
        return self.config["verify"]["convention"]


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON at line {exc.lineno} column {exc.colno}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    return cfg


def _section(cfg: dict, key: str, required: bool = True) -> dict:
    val = cfg.get(key)
    if val is None:
        if required:
            raise ConfigError(key, "missing section")
        return {}
    if not isinstance(val, dict):
        raise ConfigError(key, "must be an object")
    return val


def _num(d: dict, key: str, path: str, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing value")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    return kind(v)


def _pair(d: dict, key: str, path: str) -> tuple[float, float]:
    v = d.get(key)
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        raise ConfigError(f"{path}.{key}", f"expected [lo, hi], got {v!r}")
    return float(v[0]), float(v[1])


def _expr_text(d: dict, key: str, path: str, var: str) -> str:
    v = d.get(key)
    if not isinstance(v, str) or not v.strip():
        raise ConfigError(f"{path}.{key}", "expected a nonempty expression string")
    try:
        parse_expr(v, var)
    except ExprError as exc:
        raise ConfigError(f"{path}.{key}", str(exc)) from None
    return v


def normalize(cfg: dict) -> dict:
    """Fill defaults and validate types; returns a new dict."""
    cfg = copy.deepcopy(cfg)
    for key, default in DEFAULTS.items():
        sec = _section(cfg, key, required=False)
        merged = copy.deepcopy(default)
        for k, v in sec.items():
            if isinstance(v, dict) and isinstance(merged.get(k), dict):
                merged[k].update(v)
            else:
                merged[k] = v
        cfg[key] = merged
    amb = _section(cfg, "ambient")
    _expr_text(amb, "f", "ambient", "t")
    _pair(amb, "t_range", "ambient")
    _num(amb, "fiber_curvature", "ambient", 0, int)
    _num(amb, "n", "ambient", None, int)
    if "slice" in cfg:
        _num(_section(cfg, "slice"), "t0", "slice")
    else:
        prof = _section(cfg, "profile")
        _expr_text(prof, "theta", "profile", "s")
        _pair(prof, "s_range", "profile")
    _section(cfg, "structure")
    pts = _num(cfg["grid"], "points", "grid", None, int)
    if pts < 16:
        raise ConfigError("grid.points", f"need at least 16 points, got {pts}")
    if not _num(cfg["grid"], "tolerance", "grid") > 0:
        raise ConfigError("grid.tolerance", "must be positive")
    if not _num(cfg["verify"], "tol", "verify") > 0:
        raise ConfigError("verify.tol", "must be positive")
    if cfg["verify"].get("convention") not in ("A", "B", "both"):
        raise ConfigError("verify.convention", "must be A, B or both")
    mesh = _section(cfg["outputs"], "mesh", required=False)
    for k in ("s_points", "v_points"):
        if _num(mesh, k, "outputs.mesh", None, int) < 2:
            raise ConfigError(f"outputs.mesh.{k}", "need at least 2 points")
    return cfg


def _build_u(u_cfg, S) -> UMap:
    if not isinstance(u_cfg, dict):
        raise ConfigError("structure.u", "must be an object")
    mode = u_cfg.get("mode")
    path = "structure.u"
    if mode == "constant":
        return UMap.constant(_num(u_cfg, "value", path, 0.0))
    if mode == "isometric-identity":
        return UMap.identity(_num(u_cfg, "scale", path, 1.0))
    if mode == "fiber-linear":
        return UMap.fiber_linear(_num(u_cfg, "c4", path), _num(u_cfg, "k", path, 1, int),
                                 _num(u_cfg, "c5", path, 0.0))
    if mode == "base-radial":
        if "expr" in u_cfg:
            return UMap.radial(_expr_text(u_cfg, "expr", path, "s"))
        conv = u_cfg.get("solve")
        if conv not in ("radial-ODE", "full-Laplacian"):
            raise ConfigError(f"{path}.solve", "expected 'radial-ODE' or 'full-Laplacian' (or give 'expr')")
        if S.kind != "rotational":
            raise ConfigError(path, "base-radial u needs a rotational surface")
        return solve_u_base(S, _num(u_cfg, "c2", path), _num(u_cfg, "c3", path, 0.0), conv)
    raise ConfigError(f"{path}.mode", f"unknown mode {mode!r}")


def _coef(st: dict, key: str):
    v = st.get(key, SOLVE)
    if isinstance(v, str):
        if v.strip() == SOLVE:
            return SOLVE
        return _expr_text(st, key, "structure", "s")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"structure.{key}", f"expected an expression, a number or 'solve', got {v!r}")
    return float(v)


def build_scenario(cfg: dict, grid: int | None = None, tol: float | None = None,
                   convention: str | None = None) -> Scenario:
    """Validate ``cfg`` and build its surface and structure.

    Configuration problems raise ``ConfigError``; numerical failures
    (quadrature, profile leaving the ambient, etc.) propagate as their own
    exception types.
    """
    cfg = normalize(cfg)
    if grid is not None:
        cfg["grid"]["points"] = int(grid)
    if tol is not None:
        cfg["verify"]["tol"] = float(tol)
    if convention is not None:
        cfg["verify"]["convention"] = convention
    cfg = normalize(cfg)

    amb = cfg["ambient"]
    try:
        a = Ambient.from_text(amb["f"], amb["t_range"], amb.get("fiber_curvature", 0), amb["n"])
    except AmbientError as exc:
        raise ConfigError("ambient", str(exc)) from None

    if "slice" in cfg:
        t0 = float(cfg["slice"]["t0"])
        if not a.contains(t0):
            raise ConfigError("slice.t0", f"{t0!r} outside the ambient interval")
        S = SliceSurface(a, t0)
    else:
        prof = cfg["profile"]
        try:
            p = AngleProfile.from_text(prof["theta"], prof["s_range"])
        except SurfaceError as exc:
            raise ConfigError("profile", str(exc)) from None
        if a.fiber_curvature != 0:
            raise ConfigError("ambient.fiber_curvature", "rotational profiles need a flat fiber (0)")
        anchor = prof.get("anchor")
        if anchor is not None:
            anchor = _num(prof, "anchor", "profile")
            if anchor > p.s_range[1]:
                raise ConfigError("profile.anchor", "must not exceed the end of s_range")
        S = build_surface(a, p, _num(prof, "zeta0", "profile", 0.0), _num(prof, "beta0", "profile", 0.0),
                          cfg["grid"]["points"], cfg["grid"]["tolerance"], anchor)

    st_cfg = cfg["structure"]
    alpha = _num(st_cfg, "alpha", "structure")
    if not alpha > 0:
        raise ConfigError("structure.alpha", "must be positive")
    u = _build_u(st_cfg.get("u", {"mode": "constant"}), S)
    try:
        st = EinsteinTypeStructure(S, alpha, u, _coef(st_cfg, "mu"), _coef(st_cfg, "lambda"))
    except StructureError as exc:
        raise ConfigError("structure", str(exc)) from None
    return Scenario(cfg, S, st)

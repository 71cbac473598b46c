"""Named reference scenarios with known closed forms.

Each fixture is a scenario config plus a set of closed-form expressions
(``expectations``) for quantities such as ``sigma``, ``h``, ``u``, ``mu`` and
``lambda``.  The closed forms are data to compare against; acceptance always
uses the solver's ``(lambda, mu)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import parse_expr
from .scenario import ConfigError, Scenario, build_scenario

__all__ = ["FIXTURES", "Fixture", "FixtureSpec", "make_fixture", "compare_expectations", "fixture_names"]


def _fmt(x: float) -> str:
    return f"({x!r})"


def _fill(template: str, **vals) -> str:
    return template.format(**{k: _fmt(float(v)) for k, v in vals.items()})


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    summary: str
    defaults: dict
    config: Callable[[dict], dict]
    expectations: Callable[[dict], dict]
    validate: Callable[[dict], None] = lambda p: None
    # quantities compared only up to an additive constant
    free_constant: tuple[str, ...] = ()


@dataclass
class Fixture:
    name: str
    params: dict
    config: dict
    scenario: Scenario
    expectations: dict = field(default_factory=dict)
    free_constant: tuple[str, ...] = ()

    @property
    def surface(self):
        return self.scenario.surface

    @property
    def structure(self):
        return self.scenario.structure

    def __iter__(self):
        return iter((self.surface, self.structure, self.expectations))


def _flat(n: int, lo: float = -1e3, hi: float = 1e3) -> dict:
    return {"f": "1", "t_range": [lo, hi], "fiber_curvature": 0, "n": n}


def _common(p: dict) -> None:
    if not p["alpha"] > 0:
        raise ConfigError("params.alpha", "must be positive")
    if int(p["n"]) != p["n"] or p["n"] < 2:
        raise ConfigError("params.n", "must be an integer >= 2")


# -- sphere slice ------------------------------------------------------------

def _slice_config(p):
    return {
        "ambient": {"f": "t", "t_range": [0.0, 1e6], "fiber_curvature": 1, "n": p["n"]},
        "slice": {"t0": p["t0"]},
        "structure": {"alpha": p["alpha"],
                      "u": {"mode": "isometric-identity", "scale": 1.0 / p["t0"] ** 2},
                      "mu": "solve", "lambda": "solve"},
    }


def _slice_expect(p):
    return {"lambda": _fill("{n}+1-{alpha}", n=p["n"], alpha=p["alpha"]), "u": "identity"}


def _slice_validate(p):
    _common(p)
    if not p["t0"] > 0:
        raise ConfigError("params.t0", "must be positive")


# -- gudermannian --------------------------------------------------------------

GD = "2*arctan(tanh(s/2))"


def _gud_config(p):
    return {
        "ambient": _flat(p["n"]),
        "profile": {"theta": "sqrt(1-tanh(s)^2)", "s_range": list(p["s_range"]),
                    "zeta0": 0.0, "beta0": 0.0, "anchor": 0.0},
        "structure": {"alpha": p["alpha"], "u": {"mode": "base-radial", "expr": "sinh(s)"},
                      "mu": "solve", "lambda": "solve"},
    }


def _gud_expect(p):
    n, al = p["n"], p["alpha"]
    mu = _fill(f"({GD}*csch(s)-1)*({{n}}-2+{GD}*csch(s))/(4*arctan(tanh(s/2))^2)"
               "-{alpha}*cosh(s)^2*coth(s)^2", n=n, alpha=al)
    lam = _fill("sech(s)*(4*arctan(tanh(s/2))+({n}-2)*sinh(s))*tanh(s)/(4*arctan(tanh(s/2))^2)", n=n)
    return {"sigma": GD, "h": "log(cosh(s))", "u": "sinh(s)", "mu": mu, "lambda": lam}


def _gud_validate(p):
    _common(p)
    if not 0 < p["s_range"][0] < p["s_range"][1]:
        raise ConfigError("params.s_range", "needs 0 < s_lo < s_hi")


# -- constant angle ------------------------------------------------------------

def _cone_like_validate(p):
    _common(p)
    if not abs(p["theta0"]) < 1:
        raise ConfigError("params.theta0", "needs |theta0| < 1")


def _const_config(p):
    th, c1, cu = p["theta0"], p["c1"], p["cu"]
    c = math.sqrt(1 - th * th)
    lo = p["s_range"][0]
    u_lo = cu * math.exp(c * lo) / c + p["c2"]
    return {
        "ambient": _flat(p["n"]),
        "profile": {"theta": repr(float(th)), "s_range": list(p["s_range"]),
                    "zeta0": p["c3"], "beta0": c1, "anchor": 0.0},
        "structure": {"alpha": p["alpha"],
                      "u": {"mode": "base-radial", "solve": "radial-ODE",
                            "c2": cu * math.exp(-p["c3"]), "c3": u_lo},
                      "mu": "solve", "lambda": "solve"},
    }


def _const_expect(p):
    v = dict(th=p["theta0"], c1=p["cu"], c2=p["c2"], c3=p["c3"], c4=p["c1"], n=p["n"], alpha=p["alpha"])
    return {
        "sigma": _fill("{th}*s+{c4}", **v),
        "h": _fill("sqrt(1-{th}^2)*s+{c3}", **v),
        "u": _fill("{c1}*exp(sqrt(1-{th}^2)*s)/sqrt(1-{th}^2)+{c2}", **v),
        "lambda": _fill("(({th}*s+{c4})*{th}*sqrt(1-{th}^2)+({n}-2)*(1-{th}^2))/({th}*s+{c4})^2", **v),
        "mu": _fill("-({n}-2)/({th}*s+{c4})^2-{th}*sqrt(1-{th}^2)/((1-{th}^2)*({th}*s+{c4}))"
                    "-{alpha}*{c1}^2*exp(2*sqrt(1-{th}^2)*s)/(1-{th}^2)", **v),
    }


# -- fiber-linear map on theta = cos^2 -------------------------------------------

H_COS2 = ("-sqrt(1-cos(s)^4)*(sqrt(cos(2*s)+3)*cos(s)/sin(s)"
          "+sqrt(2)/sin(s)*log(sqrt(2)*cos(s)+sqrt(cos(2*s)+3)))/(2*sqrt(cos(2*s)+3))")


def _fiber_config(p):
    return {
        "ambient": _flat(p["n"]),
        "profile": {"theta": "cos(s)^2", "s_range": list(p["s_range"]),
                    "zeta0": 0.0, "beta0": 0.0, "anchor": 0.0},
        "structure": {"alpha": p["alpha"],
                      "u": {"mode": "fiber-linear", "c4": p["c4"], "k": p["k"], "c5": p["c5"]},
                      "mu": "solve", "lambda": "solve"},
    }


def _fiber_expect(p):
    v = dict(n=p["n"], alpha=p["alpha"], c1=p["c4"])
    core = "(16*({n}-2-{alpha}*{c1}^2-({n}-2)*cos(s)^4)+8*(s+cos(s)*sin(s))*sin(2*s))/(2*s+sin(2*s))^2"
    return {
        "sigma": "s/2+sin(2*s)/4",
        "h": H_COS2,
        "lambda": _fill(core + "+2*cos(s)^2*sqrt(1-cos(s)^4)/(s+cos(s)*sin(s))", **v),
        "mu": _fill("-(1/(1-cos(s)^4))*(2*cos(s)^2*sqrt(1-cos(s)^4)/(s+cos(s)*sin(s))"
                    "-2*cos(s)*sin(s)*(cos(s)^2/sqrt(1-cos(s)^4)+2*({n}-1)/(s+cos(s)*sin(s)))"
                    "+" + core + ")", **v),
        "u": _fill("{c1}*v_k+{c2}", c1=p["c4"], c2=p["c5"]),
    }


def _fiber_validate(p):
    _common(p)
    lo, hi = p["s_range"]
    if not 0 < lo < hi < math.pi:
        raise ConfigError("params.s_range", "must lie inside (0, pi)")
    if not 1 <= p["k"] <= p["n"] - 1:
        raise ConfigError("params.k", f"must lie in 1..{p['n'] - 1}")


# -- trivial anchors -------------------------------------------------------------

def _cyl_config(p):
    return {
        "ambient": _flat(p["n"]),
        "profile": {"theta": "0", "s_range": list(p["s_range"]), "zeta0": 0.0, "beta0": p["radius"]},
        "structure": {"alpha": p["alpha"], "u": {"mode": "constant", "value": 0.0},
                      "mu": "solve", "lambda": "solve"},
    }


def _cyl_expect(p):
    n, r = p["n"], p["radius"]
    return {"sigma": _fmt(r), "h": "s",
            "lambda": _fill("({n}-2)/{r}^2", n=n, r=r), "mu": _fill("-({n}-2)/{r}^2", n=n, r=r)}


def _cyl_validate(p):
    _common(p)
    if not p["radius"] > 0:
        raise ConfigError("params.radius", "must be positive")


def _cone_config(p):
    return {
        "ambient": _flat(p["n"]),
        "profile": {"theta": repr(float(p["theta0"])), "s_range": list(p["s_range"]),
                    "zeta0": 0.0, "beta0": 0.0, "anchor": 0.0},
        "structure": {"alpha": p["alpha"], "u": {"mode": "constant", "value": 0.0},
                      "mu": "solve", "lambda": "solve"},
    }


def _cone_expect(p):
    v = dict(th=p["theta0"], n=p["n"])
    return {"sigma": _fill("{th}*s", **v), "h": _fill("sqrt(1-{th}^2)*s", **v)}


FIXTURES: dict[str, FixtureSpec] = {
    "sphere_slice": FixtureSpec(
        "sphere_slice", "round sphere {t0} x S^n in Euclidean space, u = identity",
        {"n": 3, "alpha": 0.5, "t0": 1.0}, _slice_config, _slice_expect, _slice_validate),
    "gudermannian": FixtureSpec(
        "gudermannian", "theta = sech s in R x R^n, sigma = gd(s), u = sinh s",
        {"n": 2, "alpha": 0.5, "s_range": [0.2, 4.2]}, _gud_config, _gud_expect, _gud_validate),
    "constant_angle": FixtureSpec(
        "constant_angle", "constant angle theta0 in R x R^n, sigma = theta0 s + c1",
        {"n": 3, "alpha": 0.5, "theta0": 0.6, "c1": 1.0, "cu": 1.0, "c2": 0.0, "c3": 0.0,
         "s_range": [0.5, 5.0]}, _const_config, _const_expect, _cone_like_validate),
    "fiber_map": FixtureSpec(
        "fiber_map", "theta = cos^2 s in R x R^n, u = c4 v_k + c5",
        {"n": 2, "alpha": 0.5, "c4": 0.7, "c5": 0.0, "k": 1, "s_range": [0.3, math.pi - 0.3]},
        _fiber_config, _fiber_expect, _fiber_validate, free_constant=("h",)),
    "cylinder": FixtureSpec(
        "cylinder", "round cylinder R x S^{n-1}, u constant",
        {"n": 3, "alpha": 0.5, "radius": 1.0, "s_range": [0.0, 5.0]}, _cyl_config, _cyl_expect, _cyl_validate),
    "cone": FixtureSpec(
        "cone", "flat cone sigma = theta0 s, u constant",
        {"n": 3, "alpha": 0.5, "theta0": 0.6, "s_range": [0.5, 5.0]}, _cone_config, _cone_expect,
        _cone_like_validate),
}


def fixture_names() -> list[str]:
    return list(FIXTURES)


def make_fixture(name: str, params: dict | None = None, grid: int | None = None) -> Fixture:
    """Build a named fixture; ``params`` override the defaults key by key."""
    spec = FIXTURES.get(name)
    if spec is None:
        raise ConfigError("example", f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    p = dict(spec.defaults)
    for k, v in (params or {}).items():
        if k not in p:
            raise ConfigError(f"params.{k}", f"not a parameter of {name}")
        p[k] = v
    spec.validate(p)
    cfg = spec.config(p)
    if grid is not None:
        cfg.setdefault("grid", {})["points"] = int(grid)
    sc = build_scenario(cfg)
    return Fixture(name, p, sc.config, sc, spec.expectations(p), spec.free_constant)


def compare_expectations(fx: Fixture, points=None) -> dict[str, dict]:
    """Max deviation of each closed form from the computed quantity.

    ``lambda`` and ``mu`` are compared with the solver, ``sigma`` and ``h``
    with the integrated profile, ``u`` with the structure's map.  For
    quantities in ``free_constant`` the least-squares additive constant is
    removed first and reported as ``offset``.
    """
    S, st = fx.surface, fx.structure
    s_pts = np.asarray(S.grid if points is None else points, dtype=float)
    solved = st.with_coefficients(mu="solve", lam="solve")
    out: dict[str, dict] = {}
    for key, text in sorted(fx.expectations.items()):
        try:
            e = parse_expr(text, "s")
        except Exception as exc:
            out[key] = {"expression": text, "compared": False, "reason": str(exc).split("\n")[0]}
            continue
        computed = []
        for s in s_pts:
            s = float(s)
            if key in ("lambda", "mu"):
                lam, mu = solved.lambda_mu(s)
                computed.append(lam if key == "lambda" else mu)
            elif key == "sigma":
                computed.append(S.local(s).sigma)
            elif key == "h":
                computed.append(S.local(s).h)
            elif key == "u":
                computed.append(st.u.radial_jet(S, s).value)
        closed = np.array([e(float(s)) for s in s_pts])
        diff = closed - np.array(computed)
        offset = float(np.mean(diff)) if key in fx.free_constant else 0.0
        out[key] = {
            "expression": text,
            "compared": True,
            "offset": offset,
            "max_abs_diff": float(np.max(np.abs(diff - offset))),
        }
    return out

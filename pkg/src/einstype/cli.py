"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .expr import DomainError, ExprError
from .fixtures import FIXTURES, compare_expectations, make_fixture
from .io import PROFILE_HEADER, mesh_header, mesh_rows, profile_rows, write_csv, write_json
from .oracle import ChartError
from .reports import MARGIN_HEADER, SOLVE_HEADER, margin_rows, oracle_report, solve_rows
from .rotational import SurfaceError
from .scenario import ConfigError, Scenario, build_scenario, load_config
from .structure import StructureError, bochner_eval, residual_eq0001, residual_prop1, u_scalar_curvature

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("solve", "verify", "oracle", "example", "mesh", "margins")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="einstype",
                                 description="Einstein-type structures on rotational hypersurfaces.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("name", nargs="?", help="fixture name for 'example'")
    ap.add_argument("--config", help="scenario JSON file")
    ap.add_argument("--out", default="out", help="output directory (default: out)")
    ap.add_argument("--tol", type=float, help="verification tolerance override")
    ap.add_argument("--grid", type=int, help="number of profile grid points")
    ap.add_argument("--convention", choices=("A", "B", "both"), default=None,
                    help="tension-equation convention to gate (default: both)")
    ap.add_argument("--list", action="store_true", help="list fixtures ('example')")
    ap.add_argument("--params", help="JSON object of fixture parameter overrides ('example')")
    return ap


def _scenario(args) -> Scenario:
    if not args.config:
        raise ConfigError("--config", f"required for '{args.command}'")
    return build_scenario(load_config(args.config), grid=args.grid, tol=args.tol,
                          convention=args.convention)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _verify(sc: Scenario) -> dict:
    st = sc.structure
    eq = residual_eq0001(st, tol=sc.tol, convention=sc.convention)
    pr = residual_prop1(st, tol=sc.tol, convention=sc.convention)
    return {"eq0001": eq.to_json(), "prop1": pr.to_json(), "pass": eq.passed and pr.passed}


def _summary_line(name: str, rep: dict) -> str:
    eqs = rep["eq0001"]["equations"]
    worst = max(e["max"] for e in eqs if e["gate"])
    return f"{name}: {'pass' if rep['pass'] else 'FAIL'} (max gated residual {worst:.3e})"


def cmd_solve(args) -> int:
    sc = _scenario(args)
    st = sc.structure.with_coefficients(mu="solve", lam="solve")
    n = write_csv(_out(args) / "solve.csv", SOLVE_HEADER, solve_rows(st))
    print(f"solve: wrote {n} rows")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _scenario(args)
    rep = _verify(sc)
    write_json(_out(args) / "verify.json", rep)
    print(_summary_line("verify", rep))
    return EXIT_OK if rep["pass"] else EXIT_VERIFY


def cmd_oracle(args) -> int:
    sc = _scenario(args)
    rep = oracle_report(sc.surface)
    write_json(_out(args) / "oracle.json", rep)
    print(f"oracle: {'pass' if rep['pass'] else 'FAIL'} ({len(rep['records'])} records, "
          f"worst error/tol {rep['worst_ratio']:.3e})")
    return EXIT_OK if rep["pass"] else EXIT_VERIFY


def cmd_mesh(args) -> int:
    sc = _scenario(args)
    mesh = sc.config["outputs"]["mesh"]
    out = _out(args)
    S = sc.surface
    if S.kind != "rotational":
        raise ConfigError("slice", "mesh export needs a rotational profile, not a slice")
    rows = mesh_rows(S, mesh["s_points"], mesh["v_points"])
    write_csv(out / "mesh.csv", mesh_header(S.n), rows)
    write_csv(out / "profile.csv", PROFILE_HEADER, profile_rows(S))
    print(f"mesh: wrote {len(rows)} points")
    return EXIT_OK


def cmd_margins(args) -> int:
    sc = _scenario(args)
    rows = margin_rows(sc.structure)
    write_csv(_out(args) / "margins.csv", MARGIN_HEADER, rows)
    print(f"margins: wrote {len(rows)} rows")
    return EXIT_OK


def cmd_example(args) -> int:
    if args.list:
        for name, spec in FIXTURES.items():
            print(f"{name}: {spec.summary}; defaults {json.dumps(spec.defaults, sort_keys=True)}")
        return EXIT_OK
    if not args.name:
        raise ConfigError("example", "give a fixture name or --list")
    params = None
    if args.params:
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError:
            raise ConfigError("--params", "not valid JSON") from None
        if not isinstance(params, dict):
            raise ConfigError("--params", "must be a JSON object")
    fx = make_fixture(args.name, params, grid=args.grid)
    cfg = fx.config
    if args.tol is not None:
        cfg["verify"]["tol"] = args.tol
    if args.convention is not None:
        cfg["verify"]["convention"] = args.convention
    sc = Scenario(cfg, fx.surface, fx.structure)
    out = _out(args)
    write_json(out / "config.json", cfg)
    rep = _verify(sc)
    write_json(out / "verify.json", rep)
    st = sc.structure
    S = sc.surface
    write_csv(out / "solve.csv", SOLVE_HEADER, solve_rows(st))
    write_csv(out / "profile.csv", PROFILE_HEADER, profile_rows(S))
    write_csv(out / "margins.csv", MARGIN_HEADER, margin_rows(st))
    s0 = float(S.grid[len(S.grid) // 2])
    ru = u_scalar_curvature(st, s0)
    b = bochner_eval(st, s0, tol=sc.tol)
    write_json(out / "example.json", {
        "fixture": fx.name,
        "params": fx.params,
        "expectations": compare_expectations(fx),
        "scalar_curvature": {"s": s0, "intrinsic": ru[0], "trace": ru[1], "extrinsic": ru[2]},
        "bochner": b.as_dict(),
        "verify_pass": rep["pass"],
    })
    print(_summary_line(f"example {fx.name}", rep))
    return EXIT_OK if rep["pass"] else EXIT_VERIFY


HANDLERS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle,
            "example": cmd_example, "mesh": cmd_mesh, "margins": cmd_margins}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except DomainError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ExprError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SurfaceError, StructureError, ChartError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

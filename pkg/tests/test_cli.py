import csv
import json

import pytest

from einstype.cli import main
from einstype.expr import parse_expr
from einstype.fixtures import make_fixture

GUD = {
    "ambient": {"f": "1", "t_range": [-100, 100], "fiber_curvature": 0, "n": 2},
    "profile": {"theta": "sech(s)", "s_range": [0.2, 4.2], "zeta0": 0.0, "beta0": 0.0, "anchor": 0.0},
    "structure": {"alpha": 0.5, "u": {"mode": "base-radial", "expr": "sinh(s)"}},
    "outputs": {"mesh": {"s_points": 100, "v_points": 60}},
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(tmp_path, *args, out="out"):
    return main([*args, "--out", str(tmp_path / out)])


def test_verify_passes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, GUD)
    assert run(tmp_path, "verify", "--config", cfg) == 0
    rep = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert rep["pass"]
    tensor = rep["eq0001"]["equations"][0]
    assert tensor["equation"] == "tensor" and tensor["max"] < 1e-6
    assert "verify: pass" in capsys.readouterr().out


def test_verify_failure_exit_1(tmp_path):
    cfg = dict(GUD, structure=dict(GUD["structure"], **{"lambda": "1"}))
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, cfg)) == 1
    assert not json.loads((tmp_path / "out" / "verify.json").read_text())["pass"]


def test_convention_a_fails(tmp_path):
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, GUD), "--convention", "A") == 1


@pytest.mark.parametrize("mutate,needle", [
    (lambda c: c["profile"].update(theta="sech(q)"), "profile.theta"),
    (lambda c: c["structure"].update(alpha=-1), "structure.alpha"),
    (lambda c: c.pop("ambient"), "ambient"),
    (lambda c: c["structure"].update(u={"mode": "warp"}), "structure.u.mode"),
    (lambda c: c["profile"].update(s_range=[1]), "profile.s_range"),
    (lambda c: c.update(grid={"points": 3}), "grid.points"),
])
def test_config_errors_exit_2(tmp_path, capsys, mutate, needle):
    cfg = json.loads(json.dumps(GUD))
    mutate(cfg)
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, cfg)) == 2
    assert needle in capsys.readouterr().err


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run(tmp_path, "verify", "--config", str(p)) == 2
    assert run(tmp_path, "verify", "--config", str(tmp_path / "nope.json")) == 2
    assert run(tmp_path, "verify") == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    cfg = json.loads(json.dumps(GUD))
    cfg["profile"]["theta"] = "1"
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, cfg)) == 3
    assert "s=" in capsys.readouterr().err


def test_domain_error_exit_3(tmp_path, capsys):
    cfg = json.loads(json.dumps(GUD))
    cfg["profile"].update(theta="0.5*log(s)", s_range=[-1.0, 1.0], anchor=None)
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, cfg)) == 3


def test_profile_leaving_ambient_exit_3(tmp_path):
    cfg = json.loads(json.dumps(GUD))
    cfg["ambient"]["t_range"] = [-0.1, 0.1]
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, cfg)) == 3


def test_determinism(tmp_path):
    cfg = write_cfg(tmp_path, GUD)
    for cmd in ("verify", "mesh", "solve", "margins"):
        assert run(tmp_path, cmd, "--config", cfg, out="a") == 0
        assert run(tmp_path, cmd, "--config", cfg, out="b") == 0
    for f in ("verify.json", "mesh.csv", "profile.csv", "solve.csv", "margins.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_mesh_rows(tmp_path):
    cfg = write_cfg(tmp_path, GUD)
    assert run(tmp_path, "mesh", "--config", cfg) == 0
    lines = (tmp_path / "out" / "mesh.csv").read_text().splitlines()
    assert len(lines) == 100 * 60 + 1
    assert lines[0] == "s,v1,x0,x1,x2"


def test_mesh_on_slice_is_config_error(tmp_path):
    fx = make_fixture("sphere_slice")
    assert run(tmp_path, "mesh", "--config", write_cfg(tmp_path, fx.config)) == 2


def test_solve_constant_angle(tmp_path):
    fx = make_fixture("constant_angle")
    assert run(tmp_path, "solve", "--config", write_cfg(tmp_path, fx.config)) == 0
    lam_e = parse_expr(fx.expectations["lambda"], "s")
    u_e = parse_expr(fx.expectations["u"], "s")
    with open(tmp_path / "out" / "solve.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 201
    for r in rows:
        s = float(r["s"])
        assert float(r["lambda"]) == pytest.approx(lam_e(s), abs=1e-8)
        assert float(r["u"]) == pytest.approx(u_e(s), abs=1e-10)


def test_oracle_command(tmp_path):
    fx = make_fixture("cone")
    assert run(tmp_path, "oracle", "--config", write_cfg(tmp_path, fx.config)) == 0
    rep = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert rep["pass"] and rep["fd_chart"]


def test_margins_header(tmp_path):
    fx = make_fixture("cylinder")
    assert run(tmp_path, "margins", "--config", write_cfg(tmp_path, fx.config)) == 0
    with open(tmp_path / "out" / "margins.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 201
    assert float(rows[0]["mean_curvature_margin"]) < 0


def test_example_list(tmp_path, capsys):
    assert main(["example", "--list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in out] == ["sphere_slice", "gudermannian", "constant_angle",
                                                    "fiber_map", "cylinder", "cone"]


@pytest.mark.parametrize("name", ["sphere_slice", "gudermannian", "fiber_map", "cylinder"])
def test_example_runs(tmp_path, name):
    assert run(tmp_path, "example", name, "--grid", "41") == 0
    out = tmp_path / "out"
    for f in ("config.json", "verify.json", "solve.csv", "profile.csv", "margins.csv", "example.json"):
        assert (out / f).exists()
    ex = json.loads((out / "example.json").read_text())
    assert ex["fixture"] == name and ex["verify_pass"]
    # the written config reproduces the run
    assert run(tmp_path, "verify", "--config", str(out / "config.json"), out="again") == 0


def test_example_params_and_errors(tmp_path):
    assert run(tmp_path, "example", "cylinder", "--params", '{"radius": 2.0}', "--grid", "21") == 0
    assert json.loads((tmp_path / "out" / "example.json").read_text())["params"]["radius"] == 2.0
    assert run(tmp_path, "example", "cylinder", "--params", "[1]") == 2
    assert run(tmp_path, "example", "cylinder", "--params", "{bad") == 2
    assert run(tmp_path, "example", "torus") == 2
    assert run(tmp_path, "example") == 2


def test_tol_override(tmp_path):
    assert run(tmp_path, "verify", "--config", write_cfg(tmp_path, GUD), "--tol", "1e-30") == 1

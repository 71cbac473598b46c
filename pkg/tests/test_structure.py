import json
import math

import numpy as np
import pytest

from conftest import ALL_FIXTURES, get_fixture
from einstype.ambient import Ambient
from einstype.fixtures import make_fixture
from einstype.oracle import hessian_height_intrinsic, ricci_closed
from einstype.rotational import AngleProfile, AxiTensor, build_surface, shape_operator
from einstype.structure import (EinsteinTypeStructure, InconsistentSystemError, SingularSystemError,
                                StructureError, UMap, bochner_eval, hessian_height_extrinsic,
                                hypothesis_margins, parallel_map, residual_eq0001, residual_prop1,
                                ric_u, ricci_extrinsic, solve_lambda_mu, solve_u_base,
                                tau_residuals, tensor_residual, u_scalar_curvature, vv_k_consistency)

COMPONENTS = ("ss", "vv_k", "vv_perp")


def warped_surface(f="exp(t)", theta="0.6", n=3, m=201):
    a = Ambient.from_text(f, (-6, 6), 0, n)
    return build_surface(a, AngleProfile.from_text(theta, (0.5, 3.0)), 0.0, 1.0, m)


def test_constant_u_leaves_ricci():
    S = get_fixture("cone").surface
    st = EinsteinTypeStructure(S, 0.7, UMap.constant(2.0))
    assert ric_u(st, 2.0) == ricci_closed(S, 2.0)


def test_identity_on_slice():
    fx = get_fixture("sphere_slice")
    n, al = 3, 0.5
    assert ric_u(fx.structure, 0.0) == AxiTensor.scalar(n - 1 - al)


def test_fiber_linear_only_touches_vv_k():
    fx = make_fixture("fiber_map", {"n": 3, "k": 1})
    S, st = fx.surface, fx.structure
    s = 1.2
    diff = ric_u(st, s) - ricci_closed(S, s)
    sigma = S.local(s).sigma
    assert diff.ss == 0.0 and diff.vv_perp == 0.0
    assert diff.vv_k == pytest.approx(-0.5 * 0.7**2 / sigma**2, rel=1e-14)


def test_fiber_linear_second_angle_normalization():
    fx = make_fixture("fiber_map", {"n": 3, "k": 2})
    S, st = fx.surface, fx.structure
    v = [0.9, 0.4]
    diff = ric_u(st, 1.2, v) - ricci_closed(S, 1.2)
    assert diff.vv_k == pytest.approx(-0.5 * 0.49 / (S.local(1.2).sigma ** 2 * math.sin(0.9) ** 2))


def test_solver_loop_all_fixtures(any_fixture):
    rep = residual_eq0001(any_fixture.structure)
    t = rep.get("tensor")
    assert np.max(t.components["ss"]) < 1e-8
    assert np.max(t.components["vv_perp"]) < 1e-8
    assert rep.passed


def test_wrong_lambda_reports_residual():
    st = get_fixture("cylinder").structure.with_coefficients(lam=5.0)
    rep = residual_eq0001(st)
    assert not rep.passed
    assert rep.get("tensor").max == pytest.approx(4.0)


def test_slice_residual_is_lambda_gap():
    st = get_fixture("sphere_slice").structure.with_coefficients(lam=1.0, mu=0.0)
    t = tensor_residual(st, 0.0)
    assert t == AxiTensor.scalar((3 - 1 - 0.5) - 1.0)


def test_forms_agree(any_fixture):
    a = residual_eq0001(any_fixture.structure).get("tensor")
    b = residual_prop1(any_fixture.structure).get("tensor")
    for c in COMPONENTS:
        assert np.max(np.abs(a.signed[c] - b.signed[c])) < 1e-9


def test_forms_agree_with_closed_form_coefficients():
    fx = get_fixture("gudermannian")
    st = fx.structure.with_coefficients(mu=fx.expectations["mu"], lam=fx.expectations["lambda"])
    a = residual_eq0001(st)
    b = residual_prop1(st)
    for c in COMPONENTS:
        assert np.max(np.abs(a.get("tensor").signed[c] - b.get("tensor").signed[c])) < 1e-9
    assert a.get("tensor").max < 1e-8


def test_extrinsic_hessian_cylinder_and_gudermannian():
    S = get_fixture("cylinder").surface
    assert hessian_height_extrinsic(S, 1.0) == AxiTensor(0.0, 0.0, 0.0)
    G = get_fixture("gudermannian").surface
    assert hessian_height_extrinsic(G, 1.0).ss == pytest.approx(1 / math.cosh(1) ** 2, abs=1e-10)


@pytest.mark.parametrize("f,theta", [("exp(t)", "0.6"), ("cosh(t)", "0.3*sin(2*s)"), ("t^2+1", "0.5*cos(s)")])
def test_extrinsic_hessian_warped(f, theta):
    S = warped_surface(f, theta)
    for s in np.random.default_rng(0).uniform(0.5, 3.0, 20):
        a, b = hessian_height_extrinsic(S, s), hessian_height_intrinsic(S, s)
        for c in COMPONENTS:
            assert abs(getattr(a, c) - getattr(b, c)) < 1e-8


@pytest.mark.parametrize("f,theta,n", [("exp(t)", "0.3*sin(s)", 2), ("cosh(t)", "0.5*cos(s)", 3),
                                       ("1", "0.2*s", 4)])
def test_gauss_ricci_matches_intrinsic(f, theta, n):
    S = warped_surface(f, theta, n)
    for s in np.linspace(0.5, 3.0, 11):
        a, b = ricci_extrinsic(S, s), ricci_closed(S, s)
        for c in COMPONENTS:
            assert abs(getattr(a, c) - getattr(b, c)) < 1e-9 * max(1, abs(getattr(b, c)))


def test_cylinder_solution():
    for n in (2, 3, 5):
        S = make_fixture("cylinder", {"n": n}).surface
        lam, mu = solve_lambda_mu(S, 0.3, UMap.constant(), 1.0)
        assert (lam, mu) == (n - 2, -(n - 2))


def test_constant_angle_matches_closed_form():
    fx = get_fixture("constant_angle")
    cmp_ = {k: v for k, v in fx.expectations.items()}
    from einstype.expr import parse_expr
    lam_e, mu_e = parse_expr(cmp_["lambda"], "s"), parse_expr(cmp_["mu"], "s")
    for s in fx.surface.grid:
        lam, mu = fx.structure.lambda_mu(s)
        assert abs(lam - lam_e(s)) < 1e-8
        assert abs(mu - mu_e(s)) < 1e-8 * max(1, abs(mu_e(s)))


def test_singular_system():
    a = Ambient.from_text("1", (-5, 5), 0, 2)
    S = build_surface(a, AngleProfile.from_text("sech(s)", (5e-7, 1.0)), 0.0, 0.0, 32, anchor=0.0)
    with pytest.raises(SingularSystemError) as exc:
        solve_lambda_mu(S, 0.5, UMap.constant(), 5e-7)
    assert exc.value.s == 5e-7


def test_inconsistent_vv_k():
    fx = make_fixture("fiber_map", {"n": 3})
    S = fx.surface
    r = vv_k_consistency(S, 0.5, fx.structure.u, 1.0)
    assert r == pytest.approx(-0.5 * 0.49 / S.local(1.0).sigma ** 2)
    with pytest.raises(InconsistentSystemError):
        vv_k_consistency(S, 0.5, fx.structure.u, 1.0, tol=1e-6)
    # in two dimensions the single orbit direction absorbs the term
    fx2 = get_fixture("fiber_map")
    assert vv_k_consistency(fx2.surface, 0.5, fx2.structure.u, 1.0, tol=1e-6) == 0.0


def test_solve_u_base_gudermannian():
    S = get_fixture("gudermannian").surface
    u = solve_u_base(S, 1.0, math.sinh(S.s_lo), "radial-ODE")
    for s in np.linspace(S.s_lo, S.s_hi, 17):
        j = u.radial_jet(S, s)
        assert j.value == pytest.approx(math.sinh(s), abs=1e-9 * math.cosh(s))
        assert j.d1 == pytest.approx(math.cosh(s), rel=1e-9)


def test_solve_u_base_full_laplacian_zero_residual():
    S = get_fixture("gudermannian").surface
    u = solve_u_base(S, 1.0, 0.0, "full-Laplacian")
    st = EinsteinTypeStructure(S, 0.5, u)
    for s in S.grid[::20]:
        assert tau_residuals(st, s)["A"] < 1e-10
    assert residual_eq0001(st).get("tau", "A").gate


def test_cylinder_conventions_coincide():
    S = get_fixture("cylinder").surface
    a = solve_u_base(S, 2.0, 1.0, "full-Laplacian")
    b = solve_u_base(S, 2.0, 1.0, "radial-ODE")
    for s in (0.0, 1.7, 5.0):
        assert a.radial_jet(S, s).value == pytest.approx(2.0 * (math.exp(s) - 1.0) + 1.0, rel=1e-11)
        assert tuple(a.radial_jet(S, s)) == pytest.approx(tuple(b.radial_jet(S, s)))


def test_unknown_convention():
    with pytest.raises(StructureError):
        solve_u_base(get_fixture("cone").surface, 1.0, 0.0, "other")


@pytest.mark.parametrize("name", ["gudermannian", "constant_angle"])
def test_tension_conventions(name):
    fx = get_fixture(name)
    S, st = fx.surface, fx.structure
    n = S.n
    for s in S.grid[::10]:
        r = tau_residuals(st, s)
        g = S.local(s)
        u1 = st.u.radial_jet(S, s).d1
        assert r["B"] < 1e-8 * max(1.0, abs(u1))
        assert r["A"] == pytest.approx((n - 1) * g.dsigma / g.sigma * u1, abs=1e-8 * max(1, abs(u1)))


def test_u_scalar_curvature_slice():
    st = get_fixture("sphere_slice").structure
    n, al = 3, 0.5
    vals = u_scalar_curvature(st, 0.0)
    assert vals == pytest.approx((n * (n - 1) - al * n,) * 3, abs=1e-12)


def test_u_scalar_curvature_cylinder():
    st = get_fixture("cylinder").structure
    assert u_scalar_curvature(st, 2.0) == pytest.approx((2.0, 2.0, 2.0), abs=1e-12)


def test_u_scalar_curvature_paths_agree(rot_fixture):
    st = rot_fixture.structure
    for s in rot_fixture.surface.grid[::20]:
        i, t, e = u_scalar_curvature(st, s)
        scale = max(1.0, abs(i))
        assert abs(i - t) < 1e-8 * scale
        assert abs(i - e) < 1e-8 * scale


def test_u_scalar_curvature_warped():
    S = warped_surface("cosh(t)", "0.4*sin(s)", 3)
    st = EinsteinTypeStructure(S, 0.8, UMap.radial("s^2"))
    for s in np.linspace(0.5, 3.0, 9):
        i, t, e = u_scalar_curvature(st, s)
        assert i == pytest.approx(t, rel=1e-10, abs=1e-10)
        assert i == pytest.approx(e, rel=1e-10, abs=1e-10)


def test_bochner_slice_and_cylinder():
    b = bochner_eval(get_fixture("sphere_slice").structure, 0.0)
    assert b.applicable and b.lhs == 0.0 and b.rhs == 0.0
    st = get_fixture("cylinder").structure
    for s in (0.5, 2.5, 4.5):
        b = bochner_eval(st, s)
        assert b.applicable
        assert abs(b.lhs - b.rhs) < 1e-7


def test_bochner_not_applicable_for_varying_mu():
    b = bochner_eval(get_fixture("gudermannian").structure, 1.0)
    assert not b.applicable
    assert "mu" in b.reason
    assert math.isfinite(b.lhs) and math.isfinite(b.rhs)


def test_margins_cylinder_and_slice():
    m = hypothesis_margins(get_fixture("cylinder").structure, [1.0])[0]
    assert m["dlogf"] == 0.0
    assert m["H"] == pytest.approx(2 / 3)
    assert m["mean_curvature_margin"] < 0
    s = hypothesis_margins(get_fixture("sphere_slice").structure)[0]
    assert s["dlogf"] == 1.0 and s["H"] == 1.0
    assert s["mean_curvature_margin"] == 0.0
    assert s["fiber_margin"] == 0.0


def test_margins_root_interval():
    st = get_fixture("constant_angle").structure
    for m in hypothesis_margins(st):
        if m["discriminant"] > 0:
            assert m["root_lo"] <= m["root_hi"]
            inside = m["root_lo"] < m["rho"] < m["root_hi"]
            assert m["rho_outside"] is (not inside)
        else:
            assert m["rho_outside"] is None
        assert m["phi_norm2"] >= 0


def test_report_json_schema():
    rep = residual_eq0001(get_fixture("gudermannian").structure, grid=[0.5, 1.0])
    data = json.loads(json.dumps(rep.to_json()))
    eqs = {(e["equation"], e.get("convention")) for e in data["equations"]}
    assert eqs == {("tensor", None), ("tau", "A"), ("tau", "B")}
    tensor = data["equations"][0]
    assert set(tensor) >= {"equation", "grid", "max", "mean", "pass"}
    assert tensor["grid"][0]["s"] == 0.5
    assert set(tensor["grid"][0]["components"]) == set(COMPONENTS)
    assert all(v >= 0 for e in data["equations"] for g in e["grid"] for v in g["components"].values())


def test_convention_gating():
    st = get_fixture("gudermannian").structure
    assert residual_eq0001(st).passed
    assert residual_eq0001(st, convention="B").passed
    assert not residual_eq0001(st, convention="A").passed
    with pytest.raises(StructureError):
        residual_eq0001(st, convention="C")


def test_threaded_scan_is_deterministic(monkeypatch):
    st = get_fixture("constant_angle").structure
    monkeypatch.setenv("ETL_THREADS", "1")
    a = json.dumps(residual_eq0001(st).to_json())
    monkeypatch.setenv("ETL_THREADS", "4")
    b = json.dumps(residual_eq0001(st).to_json())
    assert a == b
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    monkeypatch.setenv("ETL_THREADS", "many")
    with pytest.raises(StructureError):
        parallel_map(abs, [1, 2])


def test_structure_validation():
    S = get_fixture("cone").surface
    with pytest.raises(StructureError):
        EinsteinTypeStructure(S, 0.0, UMap.constant())
    with pytest.raises(StructureError):
        EinsteinTypeStructure(S, 1.0, UMap.fiber_linear(1.0, k=3))
    with pytest.raises(StructureError):
        UMap("sideways")
    with pytest.raises(StructureError):
        EinsteinTypeStructure(get_fixture("sphere_slice").surface, 1.0, UMap.radial("s"))

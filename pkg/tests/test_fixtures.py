import math

import numpy as np
import pytest

from conftest import ALL_FIXTURES, get_fixture
from einstype.fixtures import FIXTURES, compare_expectations, fixture_names, make_fixture
from einstype.oracle import fiber_coordinate_laplacian, oracle_points
from einstype.scenario import ConfigError
from einstype.structure import tau_residuals


def test_names():
    assert tuple(fixture_names()) == ALL_FIXTURES
    for name, spec in FIXTURES.items():
        assert spec.name == name and spec.summary


def test_unpacking():
    S, st, expect = get_fixture("cylinder")
    assert st.surface is S
    assert set(expect) == {"sigma", "h", "lambda", "mu"}


def test_arc_length(rot_fixture):
    assert np.max(rot_fixture.surface.arc_length_defect()) < 1e-9


@pytest.mark.parametrize("name,keys,tol", [
    ("gudermannian", ("sigma", "h", "u", "lambda", "mu"), 1e-8),
    ("constant_angle", ("sigma", "h", "u", "lambda", "mu"), 1e-8),
    ("cylinder", ("sigma", "h", "lambda", "mu"), 1e-12),
    ("cone", ("sigma", "h"), 1e-12),
])
def test_expectations_match(name, keys, tol):
    res = compare_expectations(get_fixture(name))
    for k in keys:
        assert res[k]["compared"]
        assert res[k]["max_abs_diff"] < tol, (k, res[k])


def test_fiber_map_expectations_two_dims():
    res = compare_expectations(get_fixture("fiber_map"))
    for k in ("sigma", "lambda", "mu"):
        assert res[k]["max_abs_diff"] < 1e-8, (k, res[k])
    # height agrees up to an additive constant
    assert res["h"]["max_abs_diff"] < 1e-8
    assert res["h"]["offset"] == pytest.approx(-1.32108, abs=1e-5)
    # u depends on a fiber angle and is not a function of s alone
    assert not res["u"]["compared"]


def test_slice_expectation_is_not_the_solution():
    fx = get_fixture("sphere_slice")
    res = compare_expectations(fx)
    lam, _ = fx.structure.lambda_mu(0.0)
    n, al = 3, 0.5
    assert lam == pytest.approx(n - 1 - al)
    assert res["lambda"]["max_abs_diff"] == pytest.approx(2.0)


def test_fiber_map_tension_by_coordinate_laplacian():
    for n, k in ((2, 1), (3, 1), (3, 2)):
        fx = make_fixture("fiber_map", {"n": n, "k": k})
        S, st = fx.surface, fx.structure
        for p in oracle_points(S, 5, seed=1):
            # u = c4 v_k + c5, so Delta u = c4 Delta v_k
            fd = 0.7 * fiber_coordinate_laplacian(S, k, p)
            v = list(p[1:])
            r = tau_residuals(st, float(p[0]), v)
            assert abs(abs(fd) - r["A"]) < 1e-5
            assert r["A"] == pytest.approx(r["B"])


def test_fiber_map_last_angle_harmonic():
    fx = make_fixture("fiber_map", {"n": 3, "k": 2})
    S = fx.surface
    for p in oracle_points(S, 5, seed=2):
        assert abs(fiber_coordinate_laplacian(S, 2, p)) < 1e-5


@pytest.mark.parametrize("name,params,key", [
    ("cylinder", {"radius": -1.0}, "params.radius"),
    ("cone", {"theta0": 1.0}, "params.theta0"),
    ("gudermannian", {"s_range": [0.0, 1.0]}, "params.s_range"),
    ("fiber_map", {"k": 2}, "params.k"),
    ("fiber_map", {"s_range": [0.1, 3.5]}, "params.s_range"),
    ("sphere_slice", {"alpha": 0.0}, "params.alpha"),
    ("sphere_slice", {"t0": 0.0}, "params.t0"),
    ("cylinder", {"n": 1}, "params.n"),
    ("cylinder", {"height": 2}, "params.height"),
])
def test_parameter_errors(name, params, key):
    with pytest.raises(ConfigError) as exc:
        make_fixture(name, params)
    assert exc.value.key == key


def test_unknown_fixture():
    with pytest.raises(ConfigError, match="known"):
        make_fixture("torus")


def test_grid_override():
    fx = make_fixture("cone", grid=33)
    assert len(fx.surface.grid) == 33
    assert fx.config["grid"]["points"] == 33


def test_parameters_substitute_into_expectations():
    fx = make_fixture("cylinder", {"radius": 2.0, "n": 4})
    assert fx.structure.lambda_mu(1.0) == pytest.approx((0.5, -0.5))
    res = compare_expectations(fx)
    assert res["lambda"]["max_abs_diff"] < 1e-14


def test_constant_angle_other_parameters():
    fx = make_fixture("constant_angle", {"theta0": -0.3, "c1": 2.0, "cu": 0.5, "c2": 0.25,
                                         "c3": 1.0, "n": 4, "alpha": 1.5})
    res = compare_expectations(fx)
    for k in ("sigma", "h", "u", "lambda", "mu"):
        assert res[k]["max_abs_diff"] < 1e-8 * max(1.0, math.exp(2 * 0.95 * 5)), k

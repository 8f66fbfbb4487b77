import math

import numpy as np
import pytest

from slpinn.correctors import (GAUSS_CUT, LimitSolution, PblTable, QuadratureError, StretchedCoord,
                               _quad, corner_characteristic, corner_noncharacteristic, cutoff,
                               limit_characteristic, obl_bottom, obl_left, pbl_reference)
from slpinn.problems import Expression


def u0_exp1():
    return LimitSolution.from_expression(Expression("(1-x)*(1-y)"))


def test_traces_are_consistent(rng):
    u0 = u0_exp1()
    x = rng.random(20)
    assert np.allclose(u0.trace_y0(x).v, u0.u0(x, 0.0).v, atol=1e-12)
    assert np.allclose(u0.trace_y1(x).v, 0.0, atol=1e-12)
    assert np.allclose(u0.trace_x0(x).v, 1 - x, atol=1e-12)


def test_bottom_layer():
    u0 = u0_exp1()
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))
    x = np.linspace(0, 1, 5)
    assert np.allclose(obl_bottom(u0, one, 0.1, x, 0.0), -(1 - x), atol=0)
    assert obl_bottom(u0, one, 0.1, 0.5, 0.1) == pytest.approx(-0.5 * math.exp(-1), rel=1e-14)
    assert obl_bottom(u0, one, 0.1, 0.5, 745 * 0.1 + 0.1) == 0.0
    with pytest.raises(ValueError):
        obl_bottom(u0, lambda x: -one(x), 0.1, 0.5, 0.1)


def test_left_layer():
    u0 = u0_exp1()
    y = np.linspace(0, 1, 5)
    assert np.allclose(obl_left(u0, np.cos, 0.1, 0.0, y), -(1 - y), atol=0)
    x = 0.02
    want = -(1 - y) * np.exp(-np.cos(y) * x / 0.01)
    assert np.allclose(obl_left(u0, np.cos, 0.01, x, y), want, rtol=1e-14)
    zero = LimitSolution.from_expression(Expression("x*y*(1-x)"))
    assert np.all(obl_left(zero, np.cos, 0.01, 0.3, y) == 0.0)


def test_noncharacteristic_corner():
    u0 = u0_exp1()
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    assert corner_noncharacteristic(u0, 1.0, 1.0, 0.01, 0.0, 0.0) == 1.0
    assert corner_noncharacteristic(u0, 1.0, 1.0, 0.01, 0.01, 0.02) == pytest.approx(math.exp(-3), rel=1e-14)
    y = np.linspace(0, 1, 7)
    eta = corner_noncharacteristic(u0, 1.0, 1.0, 0.05, 0.0, y)
    theta = obl_bottom(u0, one, 0.05, 0.0, y)
    assert np.allclose(eta + theta, 0.0, atol=1e-15)
    var = corner_noncharacteristic(u0, 1.0, 1.0, 0.05, 0.1, 0.2, b1_trace=np.cos, b2_trace=np.exp)
    assert var == pytest.approx(math.exp(-(math.cos(0.2) * 0.1 + math.exp(0.1) * 0.2) / 0.05))


@pytest.mark.parametrize("f, want", [("sin(pi*y)", lambda x, y: (1 - x) * np.sin(np.pi * y)),
                                      ("1", lambda x, y: 1 - x),
                                      ("exp(x+y)", lambda x, y: np.exp(1 + y) - np.exp(x + y))])
def test_characteristic_limit_closed_forms(f, want):
    fe, b1 = Expression(f), Expression("1")
    x = np.array([0.0, 0.25, 0.6, 1.0])
    y = np.array([0.3, 0.5, 0.1, 0.7])
    j = limit_characteristic(fe, b1, x, y)
    assert np.allclose(j.v, want(x, y), atol=1e-12)
    assert np.allclose(j.dx, -fe(x, y), atol=1e-12)
    exact = Expression({"sin(pi*y)": "(1-x)*sin(pi*y)", "1": "1-x",
                        "exp(x+y)": "exp(1+y)-exp(x+y)"}[f]).jet(x, y)
    for g, w in zip(j.fields(), exact.fields()):
        assert np.allclose(g, w, atol=1e-10)


def test_characteristic_limit_variable_b1_and_callables():
    f, b1 = Expression("cos(pi*y)"), Expression("1+x*y")
    lim = LimitSolution.characteristic(f, b1)
    x, y = 0.3, 0.4
    want = math.cos(math.pi * y) * (math.log(1 + y) - math.log(1 + x * y)) / y
    assert lim.value(x, y) == pytest.approx(want, rel=1e-11)
    assert lim.value(1.0, y) == 0.0
    # plain callables go through the difference route
    jf = limit_characteristic(lambda a, b: math.cos(math.pi * b), lambda a, b: 1 + a * b, x, y)
    je = lim.u0(x, y)
    assert jf.v == pytest.approx(je.v, rel=1e-11)
    assert jf.dy == pytest.approx(je.dy, rel=1e-7)
    assert jf.dyy == pytest.approx(je.dyy, rel=1e-4)


def test_stretched_coord():
    s = StretchedCoord.from_y(0.25, 0.01)
    assert (s.ybar, s.ytil) == pytest.approx((2.5, 7.5))


def test_quadrature_failure_is_reported():
    with pytest.raises(QuadratureError):
        _quad(lambda t: 1.0 / t, 0.0, 1.0)


def _trace(x):
    return 1.0 - x


@pytest.mark.parametrize("x", [0.0, 0.3, 0.8])
def test_pbl_edge_value(x):
    assert pbl_reference(_trace, 1.0, x, 0.0) == pytest.approx(-(1 - x), abs=1e-10)
    assert pbl_reference(np.cos, 2.0, x, 0.0) == pytest.approx(-math.cos(x), abs=1e-10)


def test_pbl_decays():
    assert pbl_reference(_trace, 1.0, 0.5, 50.0) == 0.0
    assert pbl_reference(_trace, 1.0, 1.0, 0.3) == 0.0
    with pytest.raises(ValueError):
        pbl_reference(_trace, 1.0, 0.5, -1.0)
    with pytest.raises(ValueError):
        pbl_reference(_trace, 0.0, 0.5, 1.0)


def test_pbl_value_against_fixed_grid_quadrature():
    val = pbl_reference(_trace, 1.0, 0.5, 1.0)
    assert -0.5 < val < 0
    lower = 1.0 / math.sqrt(2 * 0.5)
    t = np.linspace(lower, GAUSS_CUT, 1_000_001)
    g = np.exp(-0.5 * t * t) * (1 - np.minimum(0.5 + 1.0 / (2 * t * t), 1.0))
    ref = -math.sqrt(2 / math.pi) * np.trapezoid(g, t)
    assert val == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("b", [1.0, 2.0])
def test_pbl_solves_stretched_heat_equation(b, rng):
    trace = lambda x: (1 - x) * math.exp(x)
    h = 1e-3
    for x, yb in zip(0.1 + 0.6 * rng.random(20), 0.2 + 2.0 * rng.random(20)):
        p = lambda a, c: pbl_reference(trace, b, a, c)
        v = p(x, yb)
        d2 = (p(x, yb + h) - 2 * v + p(x, yb - h)) / h ** 2
        dx = (p(x + h, yb) - p(x - h, yb)) / (2 * h)
        assert abs(-d2 - b * dx) <= 1e-4


def test_pbl_table_matches_direct(rng):
    table = PblTable(_trace, 1.0, nodes=2048)
    yb = np.concatenate([[0.0], 8.0 * rng.random(40), [table.ymax + 1]])
    direct = pbl_reference(_trace, 1.0, 0.0, yb)
    assert np.max(np.abs(table(yb) - direct)) <= 1e-9
    assert table(0.0) == pytest.approx(-1.0, abs=1e-12)


def test_characteristic_corner():
    phi = lambda s: pbl_reference(_trace, 1.0, 0.0, s)
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))
    y = np.array([0.0, 0.05, 0.2])
    eps = 1e-2
    assert np.allclose(corner_characteristic(phi, one, eps, 0.0, y), -phi(y / 0.1), atol=0)
    top = corner_characteristic(phi, one, eps, 0.0, 1 - y, side="top")
    assert np.allclose(top, -phi(y / 0.1), atol=0)
    assert np.all(corner_characteristic(lambda s: 0.0 * s, one, eps, 0.3, y) == 0.0)
    assert np.all(np.abs(corner_characteristic(phi, one, eps, 10.0, y)) == 0.0)
    with pytest.raises(ValueError):
        corner_characteristic(phi, one, eps, 0.0, y, side="left")


def test_cutoff():
    assert cutoff(0.1) == 1.0
    assert cutoff(0.3) == 0.0
    assert cutoff(3 / 16) == pytest.approx(0.5, abs=1e-15)
    t = np.linspace(0, 0.5, 101)
    assert np.all(np.diff(cutoff(t)) <= 0)

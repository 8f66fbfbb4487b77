import json
import math

import mpmath
import numpy as np
import pytest

from slpinn.evaluation import (ErrorReport, asym_error_exp1, exact_exp3, exp3_roots, norms,
                               shishkin_axis, solve_reference_fd, surface_dump)
from slpinn.jet import Jet2
from slpinn.models import make_model
from slpinn.problems import make_problem, preset, residual

from conftest import fd_jet


def test_roots_against_extended_precision():
    mpmath.mp.dps = 40
    for eps in (0.1, 1e-3):
        e = mpmath.mpf(eps)
        root = mpmath.sqrt(1 + 4 * e * e * mpmath.pi ** 2)
        rp, rm = exp3_roots(eps)
        assert rp == pytest.approx(float((-1 + root) / (2 * e)), rel=1e-14)
        assert rm == pytest.approx(float((-1 - root) / (2 * e)), rel=1e-14)
    rp, rm = exp3_roots(0.1)
    assert rp == pytest.approx(0.905049, abs=1e-6) and rm == pytest.approx(-10.905049, abs=1e-6)


def test_exact_exp3_against_mpmath_formula():
    mpmath.mp.dps = 50
    eps, x, y = 1e-2, 0.37, 0.21
    e = mpmath.mpf(eps)
    root = mpmath.sqrt(1 + 4 * e * e * mpmath.pi ** 2)
    rp, rm = (-1 + root) / (2 * e), (-1 - root) / (2 * e)
    k = e * mpmath.pi ** 2
    A = (mpmath.exp(rm) - 1) / (k * (mpmath.exp(rp) - mpmath.exp(rm)))
    B = (1 - mpmath.exp(rp)) / (k * (mpmath.exp(rp) - mpmath.exp(rm)))
    want = (A * mpmath.exp(rp * x) + B * mpmath.exp(rm * x) + 1 / k) * mpmath.sin(mpmath.pi * y)
    assert float(exact_exp3(eps, x, y).v) == pytest.approx(float(want), rel=1e-12)


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3, 1e-5])
def test_exact_exp3_boundary_values(eps):
    g = np.linspace(0, 1, 51)
    assert np.max(np.abs(exact_exp3(eps, g, 0.0).v)) < 1e-15
    assert np.max(np.abs(exact_exp3(eps, g, 1.0).v)) < 1e-12
    assert np.max(np.abs(exact_exp3(eps, 0.0, g).v)) < 1e-12
    assert np.max(np.abs(exact_exp3(eps, 1.0, g).v)) < 1e-12


@pytest.mark.parametrize("eps", [1e-1, 1e-2, 1e-3])
def test_exact_exp3_satisfies_pde(eps):
    g = np.linspace(0, 1, 101)[1:-1]
    X, Y = np.meshgrid(g, g)
    prob = preset("exp3", epsilon=eps).problem
    assert np.max(np.abs(residual(prob, exact_exp3(eps, X, Y), X, Y))) <= 1e-6


def test_exact_exp3_jet_against_fd():
    eps = 0.05
    got = exact_exp3(eps, 0.4, 0.3)
    want = fd_jet(lambda a, b: float(exact_exp3(eps, a, b).v), 0.4, 0.3, h=1e-4)
    for g, w in zip(got.fields(), want):
        assert float(g) == pytest.approx(w, rel=1e-6, abs=1e-7)
    with pytest.raises(ValueError):
        exact_exp3(0.0, 0.5, 0.5)


def test_asymptotic_error_edges():
    m = make_model("nonchar_const", preset("exp1").problem, n=8, seed=0, init_scale=3.0)
    assert asym_error_exp1(m, 1e-2, 0.0, 0.0) == 0.0
    y = np.linspace(0, 1, 9)
    assert np.max(np.abs(asym_error_exp1(m, 1e-2, 1.0, y))) <= math.exp(-100)


def test_norms_of_constants_and_zero():
    r = norms(lambda X, Y: np.full_like(X, -2.5), 11)
    assert r.l2 == pytest.approx(2.5, rel=1e-15) and r.linf == 2.5
    z = norms(lambda X, Y: Jet2(0 * X, 0 * X, 0 * X, 0 * X, 0 * X), 7, epsilon=0.1)
    assert (z.l2, z.linf, z.energy) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        norms(lambda X, Y: X, 1)


def test_norm_of_sine_product():
    r = norms(lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y), 401)
    assert r.l2 == pytest.approx(0.5, abs=1e-4)


def test_trapezoid_l2_converges_at_second_order():
    exact = math.sqrt((math.exp(2) - 1) ** 2 / 4)
    errs = [abs(norms(lambda X, Y: np.exp(X + Y), n).l2 - exact) for n in (11, 21, 41)]
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)


def test_energy_norm():
    eps = 0.04
    f = lambda X, Y: Jet2(X * 0 + 1.0, X * 0 + 3.0, X * 0 + 4.0, X * 0, X * 0)
    r = norms(f, 5, epsilon=eps)
    assert r.energy == pytest.approx(1.0 + 0.2 * 5.0, rel=1e-14)


def test_error_report_json(tmp_path):
    rep = ErrorReport(0.1, 0.2, None, 100, {"experiment": "exp3", "epsilon": 1e-3, "seed": 0})
    rep.write_json(tmp_path / "e.json")
    d = json.loads((tmp_path / "e.json").read_text())
    assert d["l2"] == 0.1 and d["experiment"] == "exp3" and d["energy"] is None


def test_shishkin_axis_layouts():
    a = shishkin_axis(33, "low", 0.1)
    assert a.size == 33 and a[0] == 0 and a[-1] == 1 and a[16] == pytest.approx(0.1)
    assert np.all(np.diff(a) > 0)
    b = shishkin_axis(65, "both", 0.2)
    assert b.size == 65 and b[16] == pytest.approx(0.2) and b[48] == pytest.approx(0.8)
    with pytest.raises(ValueError):
        shishkin_axis(33, "middle", 0.1)


def test_fd_zero_forcing_gives_zero():
    sol = solve_reference_fd(make_problem(1e-2, "1", "1", "0"), 33)
    assert np.all(sol.values == 0.0)


@pytest.mark.parametrize("b2", ["1", "0"])
def test_fd_maximum_principle(b2):
    pos = solve_reference_fd(make_problem(1e-3, "1+x", b2, "1+y"), 65)
    neg = solve_reference_fd(make_problem(1e-3, "1+x", b2, "-1-x*y"), 65)
    assert np.all(pos.values >= 0) and np.all(neg.values <= 0)
    assert np.max(pos.values) > 0


def test_fd_converges_to_exact_exp3():
    prob = preset("exp3").problem
    errs = []
    for M in (33, 65, 129):
        sol = solve_reference_fd(prob, M)
        X, Y = sol.mesh()
        errs.append(np.max(np.abs(sol.values - exact_exp3(prob.epsilon, X, Y).v)))
        assert sol.residual <= 1e-10
    assert errs[0] > errs[1] > errs[2] and errs[2] <= 5e-2


def test_fd_rejects_coarse_mesh():
    with pytest.raises(ValueError):
        solve_reference_fd(preset("exp3").problem, 9)


def test_fd_noncharacteristic_against_smooth_solution():
    # large eps: no layers, compare against a manufactured solution
    u = "x*(1-x)*y*(1-y)"
    f = "2*(y*(1-y) + x*(1-x)) - (1-2*x)*y*(1-y) - x*(1-x)*(1-2*y)"
    sol = solve_reference_fd(make_problem(1.0, "1", "1", f), 65)
    X, Y = sol.mesh()
    assert np.max(np.abs(sol.values - X * (1 - X) * Y * (1 - Y))) < 2e-3


def test_surface_dump_format(tmp_path):
    path = surface_dump(lambda X, Y: X + 2 * Y, 2, tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert lines == ["x,y,value", "0,0,0", "1,0,1", "0,1,2", "1,1,3"]
    surface_dump(lambda X, Y: -0.0 * X, 3, tmp_path / "z.csv")
    vals = [ln.split(",")[2] for ln in (tmp_path / "z.csv").read_text().splitlines()[1:]]
    assert vals == ["0"] * 9


def test_surface_dump_reports_path(tmp_path):
    bad = tmp_path / "missing" / "s.csv"
    with pytest.raises(OSError, match="missing"):
        surface_dump(lambda X, Y: X, 2, bad)

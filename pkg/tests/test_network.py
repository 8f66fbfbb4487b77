import numpy as np
import pytest

from slpinn.jet import jet_seed_x, jet_seed_y, lift
from slpinn.network import (NetworkParams, dumps_params, dumps_params_list, load_params,
                            loads_params, loads_params_list, net_eval_direct, net_eval_jet,
                            net_init, save_params)

from conftest import fd_jet


def test_init_is_deterministic():
    assert net_init(32, 7) == net_init(32, 7)
    assert net_init(32, 7) != net_init(32, 8)


def test_init_ranges():
    p = net_init(1, 0)
    assert p.n == 1
    assert np.all(np.abs(p.to_vector()) <= 1.0)
    q = net_init(50, 2)
    assert np.all(np.abs(q.w1) <= 1 / np.sqrt(50)) and np.all(np.abs(q.b) <= 1.0)


def test_init_scales():
    p = net_init(200, 4, weight_scale=6.0, bias_scale=6.0)
    assert np.max(np.abs(p.w1)) > 3.0 and np.max(np.abs(p.w1)) <= 6.0
    assert np.max(np.abs(p.b)) <= 6.0
    assert np.max(np.abs(p.c)) <= 1 / np.sqrt(200)
    with pytest.raises(ValueError):
        net_init(4, 0, weight_scale=0.0)


def test_output_coefficient_mean_is_small():
    assert abs(np.mean(net_init(10000, 3).c)) < 0.02


@pytest.mark.parametrize("bad", [0, -3])
def test_init_rejects_empty(bad):
    with pytest.raises(ValueError):
        net_init(bad, 0)


def test_params_validation():
    with pytest.raises(ValueError):
        NetworkParams([1.0], [1.0, 2.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        NetworkParams([np.nan], [1.0], [0.0], [1.0])
    p = net_init(3, 0)
    with pytest.raises(ValueError):
        p.w1[0] = 5.0


def test_constant_network():
    p = NetworkParams([0.0], [0.0], [0.0], [2.0])
    j = net_eval_jet(p, jet_seed_x(np.array([0.1, 0.9])), jet_seed_y(np.array([0.4, 0.0])))
    assert np.allclose(j.v, 1.0, atol=0) and np.all(j.dx == 0) and np.all(j.dyy == 0)


def test_single_neuron_at_origin_column():
    p = NetworkParams([1.0], [0.0], [0.0], [1.0])
    j = net_eval_jet(p, jet_seed_x(0.0), jet_seed_y(0.7))
    assert (float(j.v), float(j.dx), float(j.dxx), float(j.dy), float(j.dyy)) == (0.5, 0.25, 0.0, 0.0, 0.0)


def test_random_network_against_fd():
    p = net_init(8, 11)
    got = net_eval_jet(p, jet_seed_x(0.37), jet_seed_y(0.62))
    want = fd_jet(lambda a, b: float(net_eval_direct(p, a, b).v), 0.37, 0.62, h=1e-4)
    for g, w, tol in zip(got.fields(), want, (1e-14, 1e-6, 1e-6, 1e-4, 1e-4)):
        assert float(g) == pytest.approx(w, rel=tol, abs=1e-9)


def test_jet_and_direct_agree(rng):
    p = net_init(16, 5, weight_scale=4.0, bias_scale=4.0)
    x, y = rng.random(200), rng.random(200)
    a = net_eval_jet(p, jet_seed_x(x), jet_seed_y(y))
    b = net_eval_direct(p, x, y)
    for fa, fb in zip(a.fields(), b.fields()):
        assert np.max(np.abs(fa - fb)) <= 1e-13


def test_restricted_trace_has_no_y_derivatives():
    p = net_init(6, 1)
    j = net_eval_jet(p, jet_seed_x(np.linspace(0, 1, 5)), lift(0.0))
    assert np.all(j.dy == 0) and np.all(j.dyy == 0)


def test_linear_in_output_coefficients(rng):
    p = net_init(6, 2)
    x, y = rng.random(10), rng.random(10)
    a = net_eval_direct(p, x, y).v
    b = net_eval_direct(p.replace(c=3.0 * p.c), x, y).v
    assert np.allclose(b, 3.0 * a, rtol=1e-14, atol=0)


def test_bias_shift_equals_input_translation():
    p = net_init(5, 9)
    shifted = p.replace(b=p.b + 0.25 * p.w1)
    assert np.allclose(net_eval_direct(shifted, 0.3, 0.6).v, net_eval_direct(p, 0.55, 0.6).v, atol=1e-15)


def test_vector_round_trip():
    p = net_init(7, 3)
    assert NetworkParams.from_vector(p.to_vector(), seed=3) == p
    with pytest.raises(ValueError):
        NetworkParams.from_vector(np.ones(7))


def test_save_load_round_trip(tmp_path):
    p = net_init(9, 21, weight_scale=5.0)
    path = tmp_path / "p.txt"
    save_params(p, path)
    assert load_params(path) == p
    assert dumps_params(loads_params(dumps_params(p))) == dumps_params(p)
    assert path.read_text().splitlines()[0] == "n=9 seed=21"


def test_multi_network_round_trip():
    ps = (net_init(3, 0), net_init(3, 1), net_init(3, 2))
    assert loads_params_list(dumps_params_list(ps)) == ps
    with pytest.raises(ValueError):
        loads_params_list("n=1 seed=0\n1\n2\n")


def test_malformed_params_text():
    with pytest.raises(ValueError):
        loads_params("n=2 seed=0\n1 2\n1 2\n1 2\n1\n")
    with pytest.raises(ValueError):
        loads_params("garbage\n1\n1\n1\n1\n")

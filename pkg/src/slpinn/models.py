"""Boundary-exact SL-PINN ansatze.

Each model embeds closed-form layer correctors around one (or, for the
coupled parabolic-layer system, three) two-layer networks.  Two code paths
exist on purpose:

* :func:`predict` assembles the ansatz literally with :class:`~slpinn.jet.Jet2`
  algebra.
* :func:`linear_terms` writes the same ansatz as ``sum_k W_k * N_k`` where
  ``N_k`` is a network evaluated at a (possibly restricted or stretched)
  input point and ``W_k`` is a parameter-free weight jet.  Training uses
  this form because every ansatz is linear in the network outputs.

Tests require the two to agree.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .jet import Jet2, jet_exp, jet_seed_x, jet_seed_y, lift
from .network import NetworkParams, net_eval_jet, net_init
from .problems import MODEL_KINDS, Problem, residual

__all__ = [
    "SlPinnModel",
    "SystemResidual",
    "Term",
    "Operator",
    "make_model",
    "predict",
    "model_residual",
    "pbl_networks",
    "linear_terms",
    "group_operator",
    "stretched_extent",
    "KIND_CASE",
]

PBL_SIGNS = ("as_printed", "flipped")

# Nominal case each kind is designed for; the hard constraints hold regardless.
KIND_CASE = {
    "nonchar_const": "noncharacteristic",
    "nonchar_var": "noncharacteristic",
    "char_compat": "characteristic",
    "char_empirical": "characteristic",
    "char_system": "characteristic",
    "plain": None,
}


@dataclass(frozen=True)
class SlPinnModel:
    kind: str
    params: Tuple[NetworkParams, ...]
    problem: Problem
    pbl_sign: str = "as_printed"

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.pbl_sign not in PBL_SIGNS:
            raise ValueError(f"pbl_sign must be one of {PBL_SIGNS}")
        params = tuple(self.params)
        want = 3 if self.kind == "char_system" else 1
        if len(params) != want:
            raise ValueError(f"{self.kind} needs {want} network(s), got {len(params)}")
        object.__setattr__(self, "params", params)

    @property
    def epsilon(self) -> float:
        return self.problem.epsilon

    def with_params(self, params: Sequence[NetworkParams]) -> "SlPinnModel":
        return SlPinnModel(self.kind, tuple(params), self.problem, self.pbl_sign)


class SystemResidual(NamedTuple):
    r_u: np.ndarray
    r_B: np.ndarray
    r_T: np.ndarray


def make_model(kind: str, problem: Problem, n: int = 32, seed: int = 0,
               pbl_sign: str = "as_printed", init_scale: Optional[float] = None) -> SlPinnModel:
    """Fresh model; the auxiliary networks of ``char_system`` use seeds ``seed+1, seed+2``.

    ``init_scale`` sets both the input-weight and bias ranges of
    :func:`net_init`; ``None`` keeps its defaults.
    """
    count = 3 if kind == "char_system" else 1
    if init_scale is None:
        params = tuple(net_init(n, seed + k) for k in range(count))
    else:
        params = tuple(net_init(n, seed + k, init_scale, init_scale) for k in range(count))
    return SlPinnModel(kind, params, problem, pbl_sign)


def stretched_extent(epsilon: float) -> float:
    """Upper end of the stretched collocation interval for the layer networks."""
    return min(1.0 / np.sqrt(epsilon), 10.0)


# --- jet route ---------------------------------------------------------------

def _restrict_x(j: Jet2) -> Jet2:
    """Treat a jet as a function of x only."""
    return Jet2(j.v, j.dx, 0.0, j.dxx, 0.0)


def _restrict_y(j: Jet2) -> Jet2:
    return Jet2(j.v, 0.0, j.dy, 0.0, j.dyy)


def _broadcast(j: Jet2, shape) -> Jet2:
    return Jet2(*(np.broadcast_to(np.asarray(f, dtype=float), shape).copy() for f in j.fields()))


def predict(model: SlPinnModel, x, y) -> Jet2:
    """Jet of the model prediction at ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    eps = model.epsilon
    X, Y = jet_seed_x(x), jet_seed_y(y)
    zero = lift(0.0)
    one = lift(1.0)
    net = model.params[0]
    k = model.kind

    def u(a, b):
        return net_eval_jet(net, a, b)

    if k == "plain":
        out = X * (1.0 - X) * Y * (1.0 - Y) * u(X, Y)
    elif k == "nonchar_const":
        ex = jet_exp(X * (-1.0 / eps))
        ey = jet_exp(Y * (-1.0 / eps))
        A_xy = (Y - 1.0) * (u(X, Y) - u(X, zero) * ey)
        A_0y = (Y - 1.0) * (u(zero, Y) - u(zero, zero) * ey)
        out = (X - 1.0) * (A_xy - A_0y * ex)
    elif k == "nonchar_var":
        p = model.problem
        b2_x0 = _restrict_x(p.b2.jet(x, 0.0))
        b1_0y = _restrict_y(p.b1.jet(0.0, y))
        b2_00 = float(p.b2(0.0, 0.0))
        ex = jet_exp(b1_0y * X * (-1.0 / eps))
        ey = jet_exp(b2_x0 * Y * (-1.0 / eps))
        ey0 = jet_exp(Y * (-b2_00 / eps))
        A_xy = (Y - 1.0) * (u(X, Y) - u(X, zero) * ey)
        A_0y = (Y - 1.0) * (u(zero, Y) - u(zero, zero) * ey0)
        out = (X - 1.0) * (A_xy - A_0y * ex)
    elif k == "char_compat":
        ex = jet_exp(X * (-1.0 / eps))
        out = (X - 1.0) * Y * (Y - 1.0) * (u(X, Y) - u(zero, Y) * ex)
    elif k == "char_empirical":
        ex = jet_exp(X * (-1.0 / eps))
        se = 1.0 / np.sqrt(eps)
        eb = (1.0 - Y) * jet_exp(Y * (-se))
        et = Y * jet_exp((1.0 - Y) * (-se))
        A_xy = u(X, Y) - u(X, zero) * eb - u(X, one) * et
        A_0y = u(zero, Y) - u(zero, zero) * eb - u(zero, one) * et
        out = (X - 1.0) * (A_xy - A_0y * ex)
    else:
        out = _predict_system(model, X, Y)
    return _broadcast(out, shape)


def _layer_jet(model: SlPinnModel, which: str, X: Jet2, S: Jet2) -> Jet2:
    """Layer approximation as a function of the jets ``X`` and stretched ``S``.

    ``which`` selects the bottom ('B', trace u(x, 0)) or top ('T', trace
    u(x, 1)) layer.
    """
    u_net = model.params[0]
    phi_net = model.params[1] if which == "B" else model.params[2]
    trace_y = 0.0 if which == "B" else 1.0
    g = jet_exp(-S)
    h = g - jet_exp(S * -2.0)
    trace = net_eval_jet(u_net, X, lift(trace_y))
    if model.pbl_sign == "flipped":
        trace = -trace
    return (X - 1.0) * (g * trace + h * net_eval_jet(phi_net, X, S))


def _predict_system(model: SlPinnModel, X: Jet2, Y: Jet2) -> Jet2:
    eps = model.epsilon
    se = 1.0 / np.sqrt(eps)
    u_net = model.params[0]
    ybar = Y * se
    ytil = (1.0 - Y) * se
    sign = -1.0 if model.pbl_sign == "as_printed" else 1.0

    def A(Xj):
        phi_b = _layer_jet(model, "B", Xj, ybar)
        phi_t = _layer_jet(model, "T", Xj, ytil)
        return (Xj - 1.0) * net_eval_jet(u_net, Xj, Y) + sign * ((1.0 - Y) * phi_b + Y * phi_t)

    A_xy = A(X)
    A_0y = _restrict_y(A(lift(0.0)))
    return A_xy - A_0y * (1.0 - X) * jet_exp(X * (-1.0 / eps))


def pbl_networks(model: SlPinnModel, x, s) -> Tuple[Jet2, Jet2]:
    """Bottom and top layer approximations as jets in ``(x, s)`` coordinates.

    ``s`` is the stretched distance to the respective edge (y/sqrt(eps) for
    the bottom layer, (1-y)/sqrt(eps) for the top one); ``dy``/``dyy`` of
    the returned jets are derivatives with respect to ``s``.
    """
    if model.kind != "char_system":
        raise ValueError("layer networks exist only for char_system")
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    shape = np.broadcast(x, s).shape
    X, S = jet_seed_x(x), jet_seed_y(s)
    return (_broadcast(_layer_jet(model, "B", X, S), shape),
            _broadcast(_layer_jet(model, "T", X, S), shape))


def model_residual(model: SlPinnModel, x, y, problem: Optional[Problem] = None, s=None):
    """PDE residual of the model.

    For ``char_system`` a :class:`SystemResidual` is returned; the layer
    residuals are evaluated at ``(x, s)`` with ``s`` defaulting to
    ``y * stretched_extent(eps)``, which maps the unit square onto the
    layer collocation domain.
    """
    problem = model.problem if problem is None else problem
    r_u = residual(problem, predict(model, x, y), x, y)
    if model.kind != "char_system":
        return r_u
    if s is None:
        s = np.asarray(y, dtype=float) * stretched_extent(model.epsilon)
    phi_b, phi_t = pbl_networks(model, x, s)
    b = float(problem.b1(0.0, 0.0))
    return SystemResidual(r_u, -phi_b.dyy - b * phi_b.dx, -phi_t.dyy - b * phi_t.dx)


# --- linear-term route ---------------------------------------------------------

class Term(NamedTuple):
    """One summand ``W * N(px, py)``; ``sx``/``sy`` are d(px)/dx and d(py)/dy."""

    net: int
    px: np.ndarray
    py: np.ndarray
    sx: float
    sy: float
    weight: Jet2


class Operator(NamedTuple):
    """``a_xx u_xx + a_yy u_yy + a_x u_x + a_y u_y - rhs``."""

    a_xx: np.ndarray
    a_yy: np.ndarray
    a_x: np.ndarray
    a_y: np.ndarray
    rhs: np.ndarray


def group_operator(model: SlPinnModel, group: str, x, y) -> Operator:
    """Differential operator of residual group ``'u'``, ``'B'`` or ``'T'``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    p = model.problem

    def full(v):
        return np.broadcast_to(np.asarray(v, dtype=float), shape).copy()

    if group == "u":
        e = -p.epsilon
        return Operator(full(e), full(e), full(-p.b1(x, y)), full(-p.b2(x, y)), full(p.f(x, y)))
    b = float(p.b1(0.0, 0.0))
    return Operator(full(0.0), full(-1.0), full(-b), full(0.0), full(0.0))


def _ones(shape):
    return np.ones(shape)


def linear_terms(model: SlPinnModel, group: str, x, y) -> List[Term]:
    """Linear decomposition of group ``group`` at points ``(x, y)``.

    For the layer groups of ``char_system`` the second coordinate is the
    stretched variable ``s``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape
    zeros = np.zeros(shape)
    ones = np.ones(shape)
    eps = model.epsilon
    X, Y = jet_seed_x(x), jet_seed_y(y)
    k = model.kind
    T = Term

    if group != "u":
        if k != "char_system":
            raise ValueError(f"{k} has no group {group!r}")
        tr = 1.0 if model.pbl_sign == "as_printed" else -1.0
        trace_y = zeros if group == "B" else ones
        net = 1 if group == "B" else 2
        g = jet_exp(-Y)
        h = g - jet_exp(Y * -2.0)
        L = X - 1.0
        return [T(0, x, trace_y, 1.0, 0.0, L * g * tr),
                T(net, x, y, 1.0, 1.0, L * h)]

    if k == "plain":
        return [T(0, x, y, 1.0, 1.0, X * (1.0 - X) * Y * (1.0 - Y))]
    if k in ("nonchar_const", "nonchar_var"):
        if k == "nonchar_const":
            ex = jet_exp(X * (-1.0 / eps))
            ey = jet_exp(Y * (-1.0 / eps))
            ey0 = ey
        else:
            p = model.problem
            ex = jet_exp(_restrict_y(p.b1.jet(0.0, y)) * X * (-1.0 / eps))
            ey = jet_exp(_restrict_x(p.b2.jet(x, 0.0)) * Y * (-1.0 / eps))
            ey0 = jet_exp(Y * (-float(p.b2(0.0, 0.0)) / eps))
        w = (X - 1.0) * (Y - 1.0)
        return [T(0, x, y, 1.0, 1.0, w),
                T(0, x, zeros, 1.0, 0.0, -(w * ey)),
                T(0, zeros, y, 0.0, 1.0, -(w * ex)),
                T(0, zeros, zeros, 0.0, 0.0, w * ex * ey0)]
    if k == "char_compat":
        ex = jet_exp(X * (-1.0 / eps))
        w = (X - 1.0) * Y * (Y - 1.0)
        return [T(0, x, y, 1.0, 1.0, w),
                T(0, zeros, y, 0.0, 1.0, -(w * ex))]
    if k == "char_empirical":
        ex = jet_exp(X * (-1.0 / eps))
        se = 1.0 / np.sqrt(eps)
        eb = (1.0 - Y) * jet_exp(Y * (-se))
        et = Y * jet_exp((1.0 - Y) * (-se))
        L = X - 1.0
        return [T(0, x, y, 1.0, 1.0, L),
                T(0, x, zeros, 1.0, 0.0, -(L * eb)),
                T(0, x, ones, 1.0, 0.0, -(L * et)),
                T(0, zeros, y, 0.0, 1.0, -(L * ex)),
                T(0, zeros, zeros, 0.0, 0.0, L * ex * eb),
                T(0, zeros, ones, 0.0, 0.0, L * ex * et)]

    # char_system
    se = 1.0 / np.sqrt(eps)
    pb = -1.0 if model.pbl_sign == "as_printed" else 1.0
    ybar = y * se
    ytil = (1.0 - y) * se
    Yb = Y * se
    Yt = (1.0 - Y) * se
    G = jet_exp(-Yb)
    H = G - jet_exp(Yb * -2.0)
    Gt = jet_exp(-Yt)
    Ht = Gt - jet_exp(Yt * -2.0)
    L = X - 1.0
    K = (1.0 - X) * jet_exp(X * (-1.0 / eps))
    return [
        T(0, x, y, 1.0, 1.0, L),
        T(0, x, zeros, 1.0, 0.0, -((1.0 - Y) * L * G)),
        T(0, x, ones, 1.0, 0.0, -(Y * L * Gt)),
        T(1, x, ybar, 1.0, se, (1.0 - Y) * L * H * pb),
        T(2, x, ytil, 1.0, -se, Y * L * Ht * pb),
        T(0, zeros, y, 0.0, 1.0, K),
        T(0, zeros, zeros, 0.0, 0.0, -(K * (1.0 - Y) * G)),
        T(0, zeros, ones, 0.0, 0.0, -(K * Y * Gt)),
        T(1, zeros, ybar, 0.0, se, K * (1.0 - Y) * H * pb),
        T(2, zeros, ytil, 0.0, -se, K * Y * Ht * pb),
    ]


def groups(model: SlPinnModel) -> Tuple[str, ...]:
    return ("u", "B", "T") if model.kind == "char_system" else ("u",)


def term_coefficients(term: Term, op: Operator) -> np.ndarray:
    """Coefficients of the raw network fields (v, d/dpx, d/dpy, d2/dpx2, d2/dpy2).

    Applying ``op`` to ``W * N(px(x), py(y))`` gives the dot product of
    these five coefficients with the network's value and pure partials.
    """
    W = term.weight
    shape = np.shape(term.px)

    def arr(v):
        return np.broadcast_to(np.asarray(v, dtype=float), shape)

    a_v = op.a_xx * W.dxx + op.a_yy * W.dyy + op.a_x * W.dx + op.a_y * W.dy
    a_dx = (2.0 * op.a_xx * W.dx + op.a_x * W.v) * term.sx
    a_dy = (2.0 * op.a_yy * W.dy + op.a_y * W.v) * term.sy
    a_dxx = op.a_xx * W.v * term.sx ** 2
    a_dyy = op.a_yy * W.v * term.sy ** 2
    return np.stack([arr(a_v), arr(a_dx), arr(a_dy), arr(a_dxx), arr(a_dyy)])

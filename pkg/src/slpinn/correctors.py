"""Boundary-layer correctors and limit solutions.

Ordinary (exponential), parabolic (heat-kernel) and corner correctors for
the two boundary configurations.  The parabolic ones involve a convolution
integral and serve as validation oracles, not as training-time components.
Correctors are returned without cut-off multiplication.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.integrate import IntegrationWarning

from .jet import Jet2

__all__ = [
    "QuadratureError",
    "LimitSolution",
    "StretchedCoord",
    "obl_bottom",
    "obl_left",
    "corner_noncharacteristic",
    "limit_characteristic",
    "pbl_reference",
    "PblTable",
    "corner_characteristic",
    "cutoff",
]

# Gaussian weight exp(-t^2/2) drops below 1e-18 beyond this point.
GAUSS_CUT = math.sqrt(2.0 * math.log(1e18))
QUAD_TOL = 1e-12


class QuadratureError(RuntimeError):
    pass


def _quad(fn, a, b, tol=QUAD_TOL, limit=400):
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=tol, epsrel=tol, limit=limit)
        except IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {exc}") from None
    return val


@dataclass(frozen=True)
class StretchedCoord:
    ybar: float
    ytil: float
    epsilon: float

    @classmethod
    def from_y(cls, y: float, epsilon: float) -> "StretchedCoord":
        r = math.sqrt(epsilon)
        return cls(y / r, (1.0 - y) / r, epsilon)


@dataclass(frozen=True)
class LimitSolution:
    """Reduced (eps = 0) solution with its edge traces."""

    u0: Callable[..., Jet2]
    provenance: str = "closed_form"

    def trace_y0(self, x) -> Jet2:
        return self.u0(x, 0.0)

    def trace_y1(self, x) -> Jet2:
        return self.u0(x, 1.0)

    def trace_x0(self, y) -> Jet2:
        return self.u0(0.0, y)

    def value(self, x, y):
        return self.u0(x, y).v

    @classmethod
    def from_expression(cls, expr) -> "LimitSolution":
        """Closed-form limit, ``expr`` being a :class:`~slpinn.problems.Expression`."""
        return cls(expr.jet, "closed_form")

    @classmethod
    def characteristic(cls, f, b1) -> "LimitSolution":
        """``u0 = int_x^1 f/b1 dx1`` by quadrature."""
        return cls(lambda x, y: limit_characteristic(f, b1, x, y), "quadrature")


def _check_positive(value, what):
    if not np.all(np.asarray(value) > 0):
        raise ValueError(f"{what} must be positive for a layer to form")


def obl_bottom(u0: LimitSolution, b2_trace, epsilon, x, y):
    """Ordinary layer at ``y = 0``: ``-u0(x, 0) exp(-b2(x, 0) y / eps)``."""
    b = b2_trace(x)
    _check_positive(b, "b2 trace")
    return -u0.trace_y0(x).v * np.exp(-b * np.asarray(y) / epsilon)


def obl_left(u0: LimitSolution, b1_trace, epsilon, x, y):
    """Ordinary layer at ``x = 0``: ``-u0(0, y) exp(-b1(0, y) x / eps)``."""
    b = b1_trace(y)
    _check_positive(b, "b1 trace")
    return -u0.trace_x0(y).v * np.exp(-b * np.asarray(x) / epsilon)


def corner_noncharacteristic(u0: LimitSolution, b1_00, b2_00, epsilon, x, y,
                             b1_trace=None, b2_trace=None):
    """Corner corrector at the origin for ``b1, b2 > 0``.

    With ``b1_trace``/``b2_trace`` given the variable-coefficient form
    ``u0(0,0) exp(-(b1(0,y) x + b2(x,0) y) / eps)`` is used.
    """
    _check_positive(b1_00, "b1(0,0)")
    _check_positive(b2_00, "b2(0,0)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c1 = b1_00 if b1_trace is None else b1_trace(y)
    c2 = b2_00 if b2_trace is None else b2_trace(x)
    return u0.u0(0.0, 0.0).v * np.exp(-(c1 * x + c2 * y) / epsilon)


def _ratio_jet(f, b1, x, y):
    """Jet of ``f / b1``; closed form for catalog expressions, else central differences."""
    if hasattr(f, "jet") and hasattr(b1, "jet"):
        F, B = f.jet(x, y), b1.jet(x, y)
        q = F.v / B.v
        qx = (F.dx - q * B.dx) / B.v
        qy = (F.dy - q * B.dy) / B.v
        qxx = (F.dxx - 2.0 * B.dx * qx - B.dxx * q) / B.v
        qyy = (F.dyy - 2.0 * B.dy * qy - B.dyy * q) / B.v
        return Jet2(q, qx, qy, qxx, qyy)

    def q(a, b):
        return f(a, b) / b1(a, b)

    h1, h2 = 1e-6, 1e-4
    v = q(x, y)
    return Jet2(v,
                (q(x + h1, y) - q(x - h1, y)) / (2 * h1),
                (q(x, y + h1) - q(x, y - h1)) / (2 * h1),
                (q(x + h2, y) - 2 * v + q(x - h2, y)) / h2 ** 2,
                (q(x, y + h2) - 2 * v + q(x, y - h2)) / h2 ** 2)


def _limit_scalar(f, b1, x, y):
    if not x < 1.0:
        inner = _ratio_jet(f, b1, 1.0, y)
        return Jet2(0.0, -inner.v, 0.0, -inner.dx, 0.0)
    b_min = min(float(b1(t, y)) for t in np.linspace(x, 1.0, 17))
    if b_min <= 0:
        raise ValueError("b1 must be positive on [x, 1]")
    val = _quad(lambda t: _ratio_jet(f, b1, t, y).v, x, 1.0)
    dy = _quad(lambda t: _ratio_jet(f, b1, t, y).dy, x, 1.0)
    dyy = _quad(lambda t: _ratio_jet(f, b1, t, y).dyy, x, 1.0)
    here = _ratio_jet(f, b1, x, y)
    return Jet2(val, -here.v, dy, -here.dx, dyy)


def limit_characteristic(f, b1, x, y) -> Jet2:
    """Limit solution ``int_x^1 (f / b1)(x1, y) dx1`` for ``b2 = 0``, as a jet.

    Values and y-derivatives come from adaptive quadrature; x-derivatives
    from the fundamental theorem of calculus.
    """
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if xs.ndim == 0:
        return _limit_scalar(f, b1, float(xs), float(ys))
    jets = [_limit_scalar(f, b1, float(a), float(b)) for a, b in zip(xs.ravel(), ys.ravel())]
    return Jet2(*(np.array([getattr(j, k) for j in jets], dtype=float).reshape(xs.shape)
                  for k in ("v", "dx", "dy", "dxx", "dyy")))


def _pbl_scalar(u0_trace, b1_00, x, ybar):
    if ybar < 0:
        raise ValueError("stretched variable must be nonnegative")
    if x >= 1.0:
        return 0.0
    span = 1.0 - x
    lower = math.sqrt(b1_00) * ybar / math.sqrt(2.0 * span)
    if lower >= GAUSS_CUT:
        return 0.0
    shift = b1_00 * ybar * ybar / 2.0

    def integrand(t):
        arg = x if shift == 0.0 else min(x + shift / (t * t), 1.0)
        return math.exp(-0.5 * t * t) * float(u0_trace(arg))

    # u0 moves from the far end of its trace to x over t ~ lower; geometric
    # breakpoints keep each piece smooth when ybar is tiny.
    edges = [lower]
    while lower > 0 and edges[-1] * 4.0 < GAUSS_CUT:
        edges.append(edges[-1] * 4.0)
    edges.append(GAUSS_CUT)
    total = sum(_quad(integrand, a, b) for a, b in zip(edges[:-1], edges[1:]))
    return -math.sqrt(2.0 / math.pi) * total


def pbl_reference(u0_trace, b1_00, x, ybar):
    """Parabolic layer at ``y = 0`` in the stretched variable ``ybar = y/sqrt(eps)``.

    Solves ``-d2/dybar2 phi - b1(0,0) d/dx phi = 0`` with ``phi(x, 0) = -u0(x, 0)``,
    ``phi(1, ybar) = 0`` and decay as ``ybar -> inf``::

        phi = -sqrt(2/pi) int_{sqrt(b) ybar / sqrt(2(1-x))}^inf
                  exp(-t^2/2) u0(x + b ybar^2 / (2 t^2), 0) dt

    ``u0_trace`` is ``x -> u0(x, 0)`` and must vanish at ``x = 1``.
    """
    if not b1_00 > 0:
        raise ValueError("b1(0,0) must be positive")
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(ybar, dtype=float))
    if xs.ndim == 0:
        return _pbl_scalar(u0_trace, b1_00, float(xs), float(ys))
    out = np.array([_pbl_scalar(u0_trace, b1_00, float(a), float(b))
                    for a, b in zip(xs.ravel(), ys.ravel())])
    return out.reshape(xs.shape)


class PblTable:
    """Memoized ``ybar -> phi(x0, ybar)`` for repeated corner-corrector evaluation.

    Chebyshev interpolation in ``t = log(1 + ybar / scale)`` over the support
    of the layer; exactly zero beyond it.
    """

    def __init__(self, u0_trace, b1_00, x0=0.0, nodes=2048, scale=0.5):
        self.b1_00 = float(b1_00)
        self.x0 = float(x0)
        self.scale = float(scale)
        self.ymax = GAUSS_CUT * math.sqrt(2.0 * (1.0 - x0) / self.b1_00)
        self.tmax = math.log1p(self.ymax / self.scale)
        k = np.arange(nodes)
        # Chebyshev points of the second kind on [0, tmax]
        cheb = np.cos(np.pi * k / (nodes - 1))
        self.t_nodes = 0.5 * self.tmax * (1.0 - cheb)
        y_nodes = self.scale * np.expm1(self.t_nodes)
        self.values = np.array([_pbl_scalar(u0_trace, self.b1_00, self.x0, float(yb)) for yb in y_nodes])
        w = np.ones(nodes)
        w[1::2] = -1.0
        w[0] *= 0.5
        w[-1] *= 0.5
        self.weights = w

    def __call__(self, ybar):
        ybar = np.asarray(ybar, dtype=float)
        t = np.log1p(np.clip(ybar, 0.0, None) / self.scale)
        flat = t.ravel()
        out = np.empty_like(flat)
        for lo in range(0, flat.size, 4096):
            tt = flat[lo:lo + 4096][:, None]
            diff = tt - self.t_nodes[None, :]
            exact = diff == 0.0
            diff[exact] = 1.0
            q = self.weights / diff
            res = (q @ self.values) / q.sum(axis=1)
            rows, cols = np.nonzero(exact)
            res[rows] = self.values[cols]
            out[lo:lo + 4096] = res
        out = np.where(flat >= self.tmax, 0.0, out).reshape(t.shape)
        return out if out.ndim else float(out)


def corner_characteristic(phi_trace, b1_trace, epsilon, x, y, side="bottom"):
    """Corner corrector where the parabolic layer meets the ordinary layer at ``x = 0``.

    ``phi_trace`` maps the stretched distance to the edge onto the parabolic
    corrector at ``x = 0`` (direct quadrature or a :class:`PblTable`).
    Bottom: ``-phi(0, y/sqrt(eps)) exp(-b1(0,y) x/eps)``; the top one uses
    ``1 - y`` in place of ``y``.
    """
    if side not in ("bottom", "top"):
        raise ValueError("side must be 'bottom' or 'top'")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    b = b1_trace(y)
    _check_positive(b, "b1 trace")
    dist = y if side == "bottom" else 1.0 - y
    return -np.asarray(phi_trace(dist / math.sqrt(epsilon))) * np.exp(-b * x / epsilon)


def cutoff(t):
    """C2 cut-off: 1 on [0, 1/8], 0 on [1/4, inf), quintic smoothstep between."""
    t = np.asarray(t, dtype=float)
    s = np.clip((t - 0.125) / 0.125, 0.0, 1.0)
    out = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    return out if out.ndim else float(out)

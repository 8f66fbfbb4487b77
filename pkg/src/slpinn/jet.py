"""Second-order forward derivative algebra in two variables.

A :class:`Jet2` carries a value together with its first and second pure
partial derivatives in ``x`` and ``y``.  The mixed partial is not tracked:
every operator evaluated downstream is a Laplacian plus first-order terms.

Fields may be Python floats or numpy arrays; all operations broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

__all__ = [
    "Jet2",
    "lift",
    "jet_seed_x",
    "jet_seed_y",
    "jet_add",
    "jet_mul",
    "jet_scale",
    "jet_compose",
    "jet_exp",
    "jet_sin",
    "jet_cos",
    "jet_sigmoid",
    "sigmoid_chain",
]


@dataclass(frozen=True)
class Jet2:
    v: Any
    dx: Any = 0.0
    dy: Any = 0.0
    dxx: Any = 0.0
    dyy: Any = 0.0

    def fields(self) -> Tuple[Any, Any, Any, Any, Any]:
        return (self.v, self.dx, self.dy, self.dxx, self.dyy)

    def __add__(self, other):
        return jet_add(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return jet_add(self, jet_scale(_coerce(other), -1.0))

    def __rsub__(self, other):
        return jet_add(_coerce(other), jet_scale(self, -1.0))

    def __neg__(self):
        return jet_scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, Jet2):
            return jet_mul(self, other)
        return jet_scale(self, other)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(f))) for f in self.fields())


def _coerce(a) -> Jet2:
    return a if isinstance(a, Jet2) else lift(a)


def lift(c) -> Jet2:
    """Constant jet: all derivatives vanish."""
    return Jet2(c, 0.0, 0.0, 0.0, 0.0)


def jet_seed_x(x) -> Jet2:
    return Jet2(x, 1.0, 0.0, 0.0, 0.0)


def jet_seed_y(y) -> Jet2:
    return Jet2(y, 0.0, 1.0, 0.0, 0.0)


def jet_add(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(a.v + b.v, a.dx + b.dx, a.dy + b.dy, a.dxx + b.dxx, a.dyy + b.dyy)


def jet_scale(a: Jet2, k) -> Jet2:
    return Jet2(a.v * k, a.dx * k, a.dy * k, a.dxx * k, a.dyy * k)


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    return Jet2(
        a.v * b.v,
        a.dx * b.v + a.v * b.dx,
        a.dy * b.v + a.v * b.dy,
        a.dxx * b.v + 2.0 * a.dx * b.dx + a.v * b.dxx,
        a.dyy * b.v + 2.0 * a.dy * b.dy + a.v * b.dyy,
    )


def jet_compose(f_val, f_d1, f_d2, inner: Jet2) -> Jet2:
    """Chain rule for a univariate ``f`` given ``f, f', f''`` at ``inner.v``."""
    return Jet2(
        f_val,
        f_d1 * inner.dx,
        f_d1 * inner.dy,
        f_d2 * inner.dx * inner.dx + f_d1 * inner.dxx,
        f_d2 * inner.dy * inner.dy + f_d1 * inner.dyy,
    )


def jet_exp(a: Jet2) -> Jet2:
    # exp underflow to 0 is intended: every such term is multiplicative
    e = np.exp(a.v)
    return jet_compose(e, e, e, a)


def jet_sin(a: Jet2) -> Jet2:
    s, c = np.sin(a.v), np.cos(a.v)
    return jet_compose(s, c, -s, a)


def jet_cos(a: Jet2) -> Jet2:
    s, c = np.sin(a.v), np.cos(a.v)
    return jet_compose(c, -s, -c, a)


def _sigmoid(s):
    s = np.asarray(s, dtype=float)
    e = np.exp(-np.abs(s))
    out = np.where(s >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    return out if out.ndim else float(out)


def sigmoid_chain(s):
    """Logistic sigmoid and its first three derivatives.

    Uses the identities ``s' = s(1-s)``, ``s'' = s(1-s)(1-2s)`` and
    ``s''' = s'(1-2s)^2 - 2 s'^2``.
    """
    sig = _sigmoid(s)
    d1 = sig * (1.0 - sig)
    t = 1.0 - 2.0 * sig
    d2 = d1 * t
    d3 = d1 * t * t - 2.0 * d1 * d1
    return sig, d1, d2, d3


def jet_sigmoid(a: Jet2) -> Jet2:
    sig, d1, d2, _ = sigmoid_chain(a.v)
    return jet_compose(sig, d1, d2, a)

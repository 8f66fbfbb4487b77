"""Convection-diffusion problem definitions and experiment presets.

The PDE on the unit square with homogeneous Dirichlet data is

    -eps * (u_xx + u_yy) - b1 * u_x - b2 * u_y = f.

Coefficients and forcing are parsed from a small expression catalog
(polynomials in ``x``, ``y`` composed with ``sin``, ``cos``, ``exp``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy as sp

from .jet import Jet2

__all__ = [
    "Expression",
    "Problem",
    "ExperimentPreset",
    "PRESETS",
    "MODEL_KINDS",
    "residual",
    "preset",
    "make_problem",
]

_X, _Y = sp.symbols("x y", real=True)
_ALLOWED_FUNCS = {sp.sin, sp.cos, sp.exp}
_NAMESPACE = {"x": _X, "y": _Y, "pi": sp.pi, "sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "E": sp.E}

_TOKENS = re.compile(r"(?:\s|\d|\.|[-+*/()xyE]|pi|sin|cos|exp|e(?=[-+]?\d))+")

MODEL_KINDS = ("nonchar_const", "nonchar_var", "char_compat", "char_empirical", "char_system", "plain")


class Expression:
    """A catalog expression in ``x, y`` with exact pure partials up to order 2."""

    def __init__(self, source: str):
        self.source = str(source).strip()
        # sympify evaluates its input, so only catalog tokens get that far
        if not self.source or not _TOKENS.fullmatch(self.source):
            raise ValueError(f"expression {source!r} uses tokens outside the catalog")
        try:
            expr = sp.sympify(self.source, locals=_NAMESPACE)
        except (sp.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse expression {source!r}") from exc
        if not isinstance(expr, sp.Expr):
            raise ValueError(f"not a scalar expression: {source!r}")
        if not expr.free_symbols <= {_X, _Y}:
            raise ValueError(f"expression {source!r} may only use x and y")
        for pw in expr.atoms(sp.Pow):
            if not (pw.exp.is_Integer and pw.exp >= 0) and pw.base is not sp.E:
                raise ValueError(f"only nonnegative integer powers are allowed in {source!r}")
        for fn in expr.atoms(sp.Function):
            if fn.func not in _ALLOWED_FUNCS:
                raise ValueError(f"function {fn.func} not in catalog (sin, cos, exp)")
        self.expr = expr
        derivs = [expr, sp.diff(expr, _X), sp.diff(expr, _Y), sp.diff(expr, _X, 2), sp.diff(expr, _Y, 2)]
        self._fns = [sp.lambdify((_X, _Y), d, "numpy") for d in derivs]

    def __repr__(self):
        return f"Expression({self.source!r})"

    def _call(self, k, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.broadcast_to(np.asarray(self._fns[k](x, y), dtype=float), np.broadcast(x, y).shape)
        return out.copy() if out.ndim else float(out)

    def __call__(self, x, y):
        return self._call(0, x, y)

    def jet(self, x, y) -> Jet2:
        return Jet2(*(self._call(k, x, y) for k in range(5)))

    @property
    def is_zero(self) -> bool:
        return self.expr == 0


@dataclass(frozen=True)
class Problem:
    """One instance of the PDE; ``limit`` holds a registered closed-form u0."""

    epsilon: float
    b1: Expression
    b2: Expression
    f: Expression
    case: str
    limit: Optional[Expression] = None
    name: str = "custom"

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.case not in ("noncharacteristic", "characteristic"):
            raise ValueError(f"unknown case tag {self.case!r}")
        g = np.linspace(0.0, 1.0, 101)
        X, Y = np.meshgrid(g, g, indexing="ij")
        b1, b2 = self.b1(X, Y), self.b2(X, Y)
        if not np.all(b1 > 0):
            raise ValueError("b1 must be positive on the unit square")
        if self.case == "noncharacteristic" and not np.all(b2 > 0):
            raise ValueError("noncharacteristic case requires b2 > 0 on the unit square")
        if self.case == "characteristic" and not np.all(b2 == 0):
            raise ValueError("characteristic case requires b2 == 0")

    def with_epsilon(self, epsilon: float) -> "Problem":
        return Problem(float(epsilon), self.b1, self.b2, self.f, self.case, self.limit, self.name)

    def with_forcing(self, f: str, limit: Optional[str] = None) -> "Problem":
        return Problem(self.epsilon, self.b1, self.b2, Expression(f), self.case,
                       Expression(limit) if limit else None, self.name)


def make_problem(epsilon, b1: str, b2: str, f: str, limit: Optional[str] = None, name="custom") -> Problem:
    b2e = Expression(b2)
    case = "characteristic" if b2e.is_zero else "noncharacteristic"
    return Problem(float(epsilon), Expression(b1), b2e, Expression(f), case,
                   Expression(limit) if limit else None, name)


def residual(problem: Problem, u_jet: Jet2, x, y):
    """PDE residual ``-eps*lap(u) - b1 u_x - b2 u_y - f`` at ``(x, y)``."""
    b1 = problem.b1(x, y)
    b2 = problem.b2(x, y)
    return (-problem.epsilon * (u_jet.dxx + u_jet.dyy)
            - b1 * u_jet.dx - b2 * u_jet.dy - problem.f(x, y))


PRESET_LR = 5e-2
PRESET_INIT_SCALE = 6.0


@dataclass(frozen=True)
class ExperimentPreset:
    id: str
    problem: Problem
    model_kind: str
    epochs: int = 1000
    n: int = 32
    N: int = 50
    alternatives: dict = field(default_factory=dict)
    # Training defaults for the presets.  The generic TrainConfig/net_init
    # defaults (lr 1e-3, weights ~ 1/sqrt(n)) underfit the layer profiles.
    learning_rate: float = PRESET_LR
    init_scale: Optional[float] = PRESET_INIT_SCALE


# Registered limit solutions: u0 = int_x^1 f / b1 dx1 for the characteristic
# presets, and the manufactured u0 for experiment 1.
_LIMITS = {
    ("exp1", "2-x-y"): "(1-x)*(1-y)",
    ("exp3", "sin(pi*y)"): "(1-x)*sin(pi*y)",
    ("exp4", "1"): "1-x",
    ("exp4", "cos(pi*y)"): "(1-x)*cos(pi*y)",
    ("exp4", "exp(x+y)"): "exp(1+y)-exp(x+y)",
}

PRESETS = {
    "exp1": dict(b1="1", b2="1", f="2-x-y", epsilon=1e-2, kind="nonchar_const", epochs=600,
                 forcings=("2-x-y", "1"), alternatives={}),
    "exp2": dict(b1="cos(x/2+y)", b2="exp(x+y)", f="x", epsilon=1e-2, kind="nonchar_var", epochs=1000,
                 forcings=("x",), alternatives={}),
    "exp3": dict(b1="1", b2="0", f="sin(pi*y)", epsilon=1e-3, kind="char_compat", epochs=1000,
                 forcings=("sin(pi*y)",), alternatives={}),
    "exp4": dict(b1="1", b2="0", f="1", epsilon=1e-3, kind="char_system", epochs=3500,
                 forcings=("1", "cos(pi*y)", "exp(x+y)"),
                 alternatives={"char_empirical": 3000, "char_compat": 1000, "char_system": 3500}),
}


def limit_for(exp_id: str, f_source: str) -> Optional[str]:
    return _LIMITS.get((exp_id, f_source.replace(" ", "")))


def preset(exp_id: str, f: Optional[str] = None, epsilon: Optional[float] = None) -> ExperimentPreset:
    """Experiment preset: coefficients, forcing, model kind and training defaults."""
    try:
        cfg = PRESETS[exp_id]
    except KeyError:
        raise ValueError(f"unknown experiment {exp_id!r}; choose from {sorted(PRESETS)}") from None
    f = cfg["f"] if f is None else f
    eps = cfg["epsilon"] if epsilon is None else epsilon
    problem = make_problem(eps, cfg["b1"], cfg["b2"], f, limit_for(exp_id, f), name=exp_id)
    return ExperimentPreset(exp_id, problem, cfg["kind"], epochs=cfg["epochs"],
                            alternatives=dict(cfg["alternatives"]))

"""Error norms, exact and reference solutions, and plot-data dumps."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .jet import Jet2
from .problems import Problem

__all__ = [
    "ErrorReport",
    "FdSolution",
    "exact_exp3",
    "asym_error_exp1",
    "norms",
    "trapezoid_weights",
    "shishkin_axis",
    "solve_reference_fd",
    "surface_dump",
]


@dataclass
class ErrorReport:
    l2: float
    linf: float
    energy: Optional[float] = None
    N_eval: int = 0
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"l2": self.l2, "linf": self.linf, "energy": self.energy, "N_eval": self.N_eval}
        out.update(self.metadata)
        return out

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def exact_exp3(epsilon: float, x, y) -> Jet2:
    """Exact solution for ``b1 = 1, b2 = 0, f = sin(pi y)`` as a jet.

    ``u = g(x) sin(pi y)`` with ``g = (A e^{r+ x} + B e^{r- x} + 1/(eps pi^2))``.
    The value is assembled from ``expm1`` terms so the ``O(1/eps)`` pieces
    never cancel explicitly.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eps = float(epsilon)
    k = eps * math.pi ** 2
    root = math.sqrt(1.0 + 4.0 * eps * eps * math.pi ** 2)
    rp = 2.0 * k / (1.0 + root)
    rm = -(1.0 + root) / (2.0 * eps)
    erm = math.exp(rm)
    D = math.exp(rp) - erm
    ep_x = np.exp(rp * x)
    em_x = np.exp(rm * x)
    num = ep_x * np.expm1(rp * (1.0 - x)) + erm * np.expm1(rp * x) - math.expm1(rp) * em_x
    g = num / (k * D)
    ca = (erm - 1.0) / (k * D)
    cb = -math.expm1(rp) / (k * D)
    g1 = ca * rp * ep_x + cb * rm * em_x
    g2 = ca * rp * rp * ep_x + cb * rm * rm * em_x
    s = np.sin(math.pi * y)
    c = np.cos(math.pi * y)
    return Jet2(g * s, g1 * s, g * math.pi * c, g2 * s, -g * math.pi ** 2 * s)


def exp3_roots(epsilon: float):
    root = math.sqrt(1.0 + 4.0 * epsilon * epsilon * math.pi ** 2)
    return 2.0 * epsilon * math.pi ** 2 / (1.0 + root), -(1.0 + root) / (2.0 * epsilon)


def asym_error_exp1(model, epsilon, x, y):
    """Prediction minus limit and correctors for ``u0 = (1-x)(1-y)``."""
    from .models import predict

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u0 = (1.0 - x) * (1.0 - y)
    u0_0y = 1.0 - y
    u0_x0 = 1.0 - x
    return (predict(model, x, y).v - u0 + u0_0y * np.exp(-x / epsilon)
            + u0_x0 * np.exp(-y / epsilon) - np.exp(-(x + y) / epsilon))


def trapezoid_weights(N: int) -> np.ndarray:
    w = np.full(N, 1.0 / (N - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def norms(field_fn, N_eval: int, epsilon: Optional[float] = None, metadata=None) -> ErrorReport:
    """Discrete norms of ``field_fn`` on the uniform ``N_eval x N_eval`` grid.

    L2 uses the composite trapezoidal rule, Linf the grid maximum.  When
    ``epsilon`` is given and ``field_fn`` returns a jet, the energy norm
    ``||u|| + sqrt(eps) ||grad u||`` is reported too.
    """
    if int(N_eval) < 2:
        raise ValueError("N_eval must be >= 2")
    g = np.linspace(0.0, 1.0, int(N_eval))
    X, Y = np.meshgrid(g, g, indexing="ij")
    out = field_fn(X, Y)
    W = np.outer(trapezoid_weights(N_eval), trapezoid_weights(N_eval))
    val = out.v if isinstance(out, Jet2) else out
    val = np.broadcast_to(np.asarray(val, dtype=float), X.shape)
    l2 = float(np.sqrt(np.sum(W * val * val)))
    linf = float(np.max(np.abs(val)))
    energy = None
    if epsilon is not None and isinstance(out, Jet2):
        gx = np.broadcast_to(np.asarray(out.dx, dtype=float), X.shape)
        gy = np.broadcast_to(np.asarray(out.dy, dtype=float), X.shape)
        energy = l2 + math.sqrt(epsilon) * float(np.sqrt(np.sum(W * (gx * gx + gy * gy))))
    return ErrorReport(l2, linf, energy, int(N_eval), dict(metadata or {}))


# --- finite-difference oracle ------------------------------------------------------

@dataclass
class FdSolution:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    residual: float
    metadata: dict = field(default_factory=dict)

    def mesh(self):
        return np.meshgrid(self.xs, self.ys, indexing="ij")


def shishkin_axis(M: int, layers: str, width: float) -> np.ndarray:
    """Piecewise-uniform axis of ``M`` nodes on [0, 1].

    ``layers='low'``: half the intervals in ``[0, width]``.
    ``layers='both'``: a quarter in each of ``[0, width]`` and ``[1-width, 1]``.
    """
    n = M - 1
    if layers == "low":
        k = n // 2
        return np.concatenate([np.linspace(0.0, width, k + 1), np.linspace(width, 1.0, n - k + 1)[1:]])
    if layers == "both":
        k = n // 4
        return np.concatenate([np.linspace(0.0, width, k + 1),
                               np.linspace(width, 1.0 - width, n - 2 * k + 1)[1:],
                               np.linspace(1.0 - width, 1.0, k + 1)[1:]])
    raise ValueError(f"unknown layer layout {layers!r}")


def _second_diff_coeffs(h_m, h_p):
    s = h_m + h_p
    return 2.0 / (h_m * s), 2.0 / (h_p * s)


def solve_reference_fd(problem: Problem, Mx: int, My: Optional[int] = None) -> FdSolution:
    """Upwind finite differences on a Shishkin mesh.

    Central second differences for diffusion, first-order upwinding for
    convection.  The mesh refines the outflow layer at ``x = 0`` (width
    ``2 eps/beta ln M``) and, for ``b2 > 0``, the layer at ``y = 0``; for
    ``b2 = 0`` both parabolic layers at ``y = 0, 1`` (width ``2 sqrt(eps) ln M``).
    """
    My = Mx if My is None else My
    if Mx < 33 or My < 33:
        raise ValueError("need at least 33 nodes per axis")
    eps = problem.epsilon
    g = np.linspace(0.0, 1.0, 101)
    G1, G2 = np.meshgrid(g, g, indexing="ij")
    beta1 = float(np.min(problem.b1(G1, G2)))
    xs = shishkin_axis(Mx, "low", min(0.5, 2.0 * eps / beta1 * math.log(Mx)))
    if problem.case == "characteristic":
        ys = shishkin_axis(My, "both", min(0.25, 2.0 * math.sqrt(eps) * math.log(My)))
    else:
        beta2 = float(np.min(problem.b2(G1, G2)))
        ys = shishkin_axis(My, "low", min(0.5, 2.0 * eps / beta2 * math.log(My)))

    nx, ny = Mx - 2, My - 2
    X, Y = np.meshgrid(xs[1:-1], ys[1:-1], indexing="ij")
    hxm = (xs[1:-1] - xs[:-2])[:, None] * np.ones((1, ny))
    hxp = (xs[2:] - xs[1:-1])[:, None] * np.ones((1, ny))
    hym = np.ones((nx, 1)) * (ys[1:-1] - ys[:-2])[None, :]
    hyp = np.ones((nx, 1)) * (ys[2:] - ys[1:-1])[None, :]
    cxm, cxp = _second_diff_coeffs(hxm, hxp)
    cym, cyp = _second_diff_coeffs(hym, hyp)
    b1 = problem.b1(X, Y)
    b2 = problem.b2(X, Y)

    # -eps*lap(u) - b1 u_x - b2 u_y; upwinding follows the sign of -b.
    west = -eps * cxm - np.where(b1 < 0, -b1 / hxm, 0.0)
    east = -eps * cxp - np.where(b1 > 0, b1 / hxp, 0.0)
    south = -eps * cym - np.where(b2 < 0, -b2 / hym, 0.0)
    north = -eps * cyp - np.where(b2 > 0, b2 / hyp, 0.0)
    diag = -(west + east + south + north)
    rhs = problem.f(X, Y)

    idx = np.arange(nx * ny).reshape(nx, ny)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [diag.ravel()]
    for coef, di, dj in ((west, -1, 0), (east, 1, 0), (south, 0, -1), (north, 0, 1)):
        I, J = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        I2, J2 = I + di, J + dj
        ok = (I2 >= 0) & (I2 < nx) & (J2 >= 0) & (J2 < ny)
        rows.append(idx[ok])
        cols.append(idx[I2[ok], J2[ok]])
        vals.append(coef[ok])
    A = sps.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(nx * ny, nx * ny))
    F = np.asarray(rhs, dtype=float).ravel()
    lu = spla.splu(A)
    u = lu.solve(F)
    scale = abs(A).max() * max(np.max(np.abs(u)), 1.0) + np.max(np.abs(F))
    rel = float(np.max(np.abs(A @ u - F)) / scale) if scale > 0 else 0.0
    for _ in range(5):
        if rel <= 1e-10:
            break
        u = u + lu.solve(F - A @ u)
        rel = float(np.max(np.abs(A @ u - F)) / scale)
    if rel > 1e-10:
        raise RuntimeError(f"finite-difference solve left relative residual {rel:.2e}")
    values = np.zeros((Mx, My))
    values[1:-1, 1:-1] = u.reshape(nx, ny)
    return FdSolution(xs, ys, values, rel, {"epsilon": eps, "Mx": Mx, "My": My})


def surface_dump(field_fn, N_eval: int, path) -> Path:
    """Write ``x,y,value`` rows on the uniform grid (y varies slowest)."""
    g = np.linspace(0.0, 1.0, int(N_eval))
    Y, X = np.meshgrid(g, g, indexing="ij")
    out = field_fn(X, Y)
    vals = out.v if isinstance(out, Jet2) else out
    vals = np.broadcast_to(np.asarray(vals, dtype=float), X.shape)
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "value"])
            for xv, yv, v in zip(X.ravel(), Y.ravel(), vals.ravel()):
                w.writerow([f"{xv:.17g}", f"{yv:.17g}", f"{v + 0.0:.17g}"])
    except OSError as exc:
        raise OSError(f"cannot write surface dump to {path}: {exc}") from exc
    return path

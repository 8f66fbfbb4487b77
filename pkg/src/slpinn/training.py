"""Collocation loss, exact parameter gradients and the optimization loop."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .models import (SlPinnModel, group_operator, groups, linear_terms, stretched_extent,
                     term_coefficients)
from .network import NetworkParams

__all__ = [
    "CollocationGrid",
    "TrainConfig",
    "TrainingTrace",
    "TrainingDiverged",
    "CompiledLoss",
    "Adam",
    "loss",
    "grad_loss",
    "train",
    "pairwise_sum",
]

log = logging.getLogger(__name__)

# Fixed block size: the reduction tree depends only on this, never on workers.
BLOCK = 1024


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class CollocationGrid:
    """Uniform ``N x N`` tensor grid on the closed unit square."""

    N: int

    def __post_init__(self):
        if int(self.N) < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, int(self.N))

    @property
    def points(self):
        X, Y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return X.ravel(), Y.ravel()

    def __len__(self):
        return int(self.N) ** 2


@dataclass
class TrainConfig:
    epochs: int = 1000
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    seed: int = 0
    log_every: int = 1
    workers: int = 1

    def __post_init__(self):
        if int(self.epochs) < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.optimizer not in ("adam", "gradient_descent"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if int(self.log_every) < 1:
            raise ValueError("log_every must be >= 1")


@dataclass
class TrainingTrace:
    epochs: List[int] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)
    params: Sequence[NetworkParams] = ()

    def record(self, epoch, loss_value, grad_norm, seconds):
        self.epochs.append(int(epoch))
        self.losses.append(float(loss_value))
        self.grad_norms.append(float(grad_norm))
        self.seconds.append(float(seconds))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss", "grad_norm", "seconds"])
            for row in zip(self.epochs, self.losses, self.grad_norms, self.seconds):
                w.writerow([row[0], repr(row[1]), repr(row[2]), f"{row[3]:.6f}"])


def pairwise_sum(items):
    """Sum by a fixed balanced tree over the given order."""
    items = list(items)
    if not items:
        raise ValueError("nothing to sum")
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


class _Group:
    def __init__(self, model: SlPinnModel, name: str, x: np.ndarray, y: np.ndarray):
        self.name = name
        self.x, self.y = x, y
        op = group_operator(model, name, x, y)
        self.rhs = op.rhs
        self.weight = 1.0 / x.size
        per_net = {}
        for term in linear_terms(model, name, x, y):
            per_net.setdefault(term.net, []).append(term)
        self.nets = []
        for net, terms in sorted(per_net.items()):
            px = np.stack([np.broadcast_to(t.px, x.shape) for t in terms]).astype(float)
            py = np.stack([np.broadcast_to(t.py, x.shape) for t in terms]).astype(float)
            alpha = np.stack([term_coefficients(t, op) for t in terms])
            self.nets.append((net, np.ascontiguousarray(px), np.ascontiguousarray(py),
                              np.ascontiguousarray(alpha)))


class CompiledLoss:
    """Mean-squared collocation loss of a model on a grid, with exact gradient.

    The operator coefficients of every linear term are precomputed once; an
    evaluation then only runs the network kernels.  Points are split into
    blocks of fixed size and block partials are reduced by
    :func:`pairwise_sum`, so results do not depend on ``workers``.
    """

    def __init__(self, model: SlPinnModel, grid: CollocationGrid, workers: int = 1, backend=None):
        self.model = model
        self.grid = grid
        self.workers = max(1, int(workers))
        self.backend = kernels.get_backend(backend)
        x, y = grid.points
        self.groups = [_Group(model, "u", x, y)]
        if model.kind == "char_system":
            s = y * stretched_extent(model.epsilon)
            self.groups.append(_Group(model, "B", x, s))
            self.groups.append(_Group(model, "T", x, s))
        self.blocks = [(gi, lo, min(lo + BLOCK, g.x.size))
                       for gi, g in enumerate(self.groups)
                       for lo in range(0, g.x.size, BLOCK)]
        self.sizes = [p.n for p in model.params]

    def _residual_block(self, params, gi, lo, hi):
        g = self.groups[gi]
        r = -g.rhs[lo:hi]
        for net, px, py, alpha in g.nets:
            p = params[net]
            r = r + self.backend.forward(p.w1, p.w2, p.b, p.c, px[:, lo:hi], py[:, lo:hi], alpha[:, :, lo:hi])
        return r

    def _block(self, params, need_grad, blk):
        gi, lo, hi = blk
        g = self.groups[gi]
        r = self._residual_block(params, gi, lo, hi)
        if not np.all(np.isfinite(r)):
            bad = lo + int(np.flatnonzero(~np.isfinite(r))[0])
            raise FloatingPointError(
                f"non-finite residual in group {g.name!r} at point ({g.x[bad]!r}, {g.y[bad]!r})")
        part = g.weight * np.sum(r * r)
        if not need_grad:
            return part, None, r
        grads = [np.zeros((4, n)) for n in self.sizes]
        rbar = 2.0 * g.weight * r
        for net, px, py, alpha in g.nets:
            p = params[net]
            grads[net] = grads[net] + self.backend.backward(
                p.w1, p.w2, p.b, p.c, px[:, lo:hi], py[:, lo:hi], alpha[:, :, lo:hi], rbar)
        return part, np.concatenate([gr.ravel() for gr in grads]), r

    def _run(self, params, need_grad):
        params = tuple(params)
        if self.workers == 1:
            results = [self._block(params, need_grad, b) for b in self.blocks]
        else:
            with ThreadPoolExecutor(self.workers) as ex:
                results = list(ex.map(lambda b: self._block(params, need_grad, b), self.blocks))
        return results

    def value(self, params=None) -> float:
        params = self.model.params if params is None else params
        return float(pairwise_sum([r[0] for r in self._run(params, False)]))

    def value_and_grad(self, params=None):
        params = self.model.params if params is None else params
        res = self._run(params, True)
        return float(pairwise_sum([r[0] for r in res])), pairwise_sum([r[1] for r in res])

    def residuals(self, params=None):
        """Residual arrays per group, in grid order."""
        params = self.model.params if params is None else params
        out = {g.name: np.empty(g.x.size) for g in self.groups}
        for (gi, lo, hi), (_, _, r) in zip(self.blocks, self._run(params, False)):
            out[self.groups[gi].name][lo:hi] = r
        return out


def flatten(params: Sequence[NetworkParams]) -> np.ndarray:
    return np.concatenate([p.to_vector() for p in params])


def unflatten(theta: np.ndarray, like: Sequence[NetworkParams]) -> tuple:
    out, k = [], 0
    for p in like:
        m = 4 * p.n
        out.append(NetworkParams.from_vector(theta[k:k + m], seed=p.seed))
        k += m
    return tuple(out)


def loss(model: SlPinnModel, grid: CollocationGrid, workers: int = 1) -> float:
    return CompiledLoss(model, grid, workers).value()


def grad_loss(model: SlPinnModel, grid: CollocationGrid, workers: int = 1) -> np.ndarray:
    """Exact gradient of :func:`loss` w.r.t. the flattened parameters of all networks."""
    return CompiledLoss(model, grid, workers).value_and_grad()[1]


class Adam:
    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * (grad * grad)
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class _GradientDescent:
    def __init__(self, lr):
        self.lr = lr

    def step(self, theta, grad):
        return theta - self.lr * grad


def train(model: SlPinnModel, config: TrainConfig, grid: Optional[CollocationGrid] = None,
          compiled: Optional[CompiledLoss] = None) -> TrainingTrace:
    """Full-batch training; returns the trace with the final parameters.

    The trace holds the loss before every logged update and a final entry at
    ``epoch == config.epochs`` for the returned parameters.
    """
    if compiled is None:
        compiled = CompiledLoss(model, grid if grid is not None else CollocationGrid(50), config.workers)
    if config.optimizer == "adam":
        opt = Adam(config.learning_rate, config.beta1, config.beta2, config.eps_adam)
    else:
        opt = _GradientDescent(config.learning_rate)
    params = tuple(model.params)
    theta = flatten(params)
    trace = TrainingTrace()
    t0 = time.perf_counter()
    initial = None
    for epoch in range(int(config.epochs) + 1):
        value, grad = compiled.value_and_grad(params)
        if initial is None:
            initial = value
        if not np.isfinite(value) or value > 1e6 * max(initial, 1e-300):
            raise TrainingDiverged(
                f"loss {value:.3e} at epoch {epoch} exceeds 1e6 x initial loss {initial:.3e}")
        if epoch % config.log_every == 0 or epoch == config.epochs:
            trace.record(epoch, value, np.linalg.norm(grad), time.perf_counter() - t0)
            if epoch % max(config.log_every, 100) == 0:
                log.debug("epoch %d loss %.6e", epoch, value)
        if epoch == config.epochs:
            break
        theta = opt.step(theta, grad)
        params = unflatten(theta, params)
    trace.params = params
    return trace

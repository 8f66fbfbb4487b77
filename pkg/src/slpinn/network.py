"""Two-layer scalar sigmoid network with exact input-derivative jets."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from typing import Optional

import numpy as np

from .jet import Jet2, jet_add, jet_scale, jet_sigmoid, lift, sigmoid_chain

__all__ = [
    "NetworkParams",
    "net_init",
    "net_eval_jet",
    "net_eval_direct",
    "save_params",
    "load_params",
    "dumps_params",
    "loads_params",
    "dumps_params_list",
    "loads_params_list",
]


@dataclass(frozen=True)
class NetworkParams:
    """Parameters of ``u(x, y) = sum_j c_j sigmoid(w1_j x + w2_j y + b_j)``."""

    w1: np.ndarray
    w2: np.ndarray
    b: np.ndarray
    c: np.ndarray
    seed: int = 0
    n: int = field(init=False)

    def __post_init__(self):
        arrays = []
        for name in ("w1", "w2", "b", "c"):
            a = np.array(getattr(self, name), dtype=np.float64).reshape(-1)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrays.append(a)
        n = arrays[0].size
        if n < 1:
            raise ValueError("network needs at least one neuron")
        if any(a.size != n for a in arrays):
            raise ValueError("w1, w2, b, c must have identical length")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("network parameters must be finite")
        object.__setattr__(self, "n", n)

    def to_vector(self) -> np.ndarray:
        """Flat parameter vector ordered (w1, w2, b, c)."""
        return np.concatenate([self.w1, self.w2, self.b, self.c])

    @classmethod
    def from_vector(cls, theta, seed: int = 0) -> "NetworkParams":
        theta = np.asarray(theta, dtype=np.float64)
        if theta.ndim != 1 or theta.size % 4:
            raise ValueError("parameter vector length must be a multiple of 4")
        w1, w2, b, c = np.split(theta, 4)
        return cls(w1, w2, b, c, seed=seed)

    def replace(self, **kw) -> "NetworkParams":
        d = dict(w1=self.w1, w2=self.w2, b=self.b, c=self.c, seed=self.seed)
        d.update(kw)
        return NetworkParams(**d)

    def __eq__(self, other):
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.to_vector(), other.to_vector())

    __hash__ = None


def net_init(n: int, seed: int, weight_scale: Optional[float] = None,
             bias_scale: float = 1.0) -> NetworkParams:
    """Deterministic initialization.

    ``w1, w2`` are uniform on ``[-a, a]`` with ``a = weight_scale`` (default
    ``1/sqrt(n)``), ``b`` on ``[-bias_scale, bias_scale]`` and ``c`` on
    ``[-1/sqrt(n), 1/sqrt(n)]``.  PCG64 makes the draw platform independent.
    """
    if int(n) < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    n = int(n)
    scale = 1.0 / np.sqrt(n)
    a = scale if weight_scale is None else float(weight_scale)
    if not (a > 0 and bias_scale > 0):
        raise ValueError("init scales must be positive")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    w1 = rng.uniform(-a, a, n)
    w2 = rng.uniform(-a, a, n)
    b = rng.uniform(-bias_scale, bias_scale, n)
    c = rng.uniform(-scale, scale, n)
    return NetworkParams(w1, w2, b, c, seed=int(seed))


def _expand(j: Jet2) -> Jet2:
    return Jet2(*(np.asarray(f, dtype=float)[..., None] for f in j.fields()))


def net_eval_jet(params: NetworkParams, x: Jet2, y: Jet2) -> Jet2:
    """Network output as a jet, built from the generic jet algebra.

    ``x`` and ``y`` are jets of the network inputs; restricted traces such
    as ``u(x, 0)`` are obtained by passing ``lift(0.0)`` for ``y``.
    """
    if not isinstance(x, Jet2):
        x = lift(x)
    if not isinstance(y, Jet2):
        y = lift(y)
    z = jet_add(jet_add(jet_scale(_expand(x), params.w1), jet_scale(_expand(y), params.w2)), lift(params.b))
    out = jet_scale(jet_sigmoid(z), params.c)
    return Jet2(*(np.sum(np.broadcast_to(f, np.broadcast(*out.fields()).shape), axis=-1) for f in out.fields()))


def net_eval_direct(params: NetworkParams, x, y) -> Jet2:
    """Closed-form summation of the output and its pure partials.

    Independent of the jet algebra; used to cross-check :func:`net_eval_jet`.
    """
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]
    w1, w2, c = params.w1, params.w2, params.c
    s, d1, d2, _ = sigmoid_chain(w1 * x + w2 * y + params.b)
    return Jet2(
        np.sum(c * s, axis=-1),
        np.sum(c * w1 * d1, axis=-1),
        np.sum(c * w2 * d1, axis=-1),
        np.sum(c * w1 * w1 * d2, axis=-1),
        np.sum(c * w2 * w2 * d2, axis=-1),
    )


def _fmt_row(a: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in a)


def dumps_params(params: NetworkParams) -> str:
    lines = [f"n={params.n} seed={params.seed}"]
    lines += [_fmt_row(a) for a in (params.w1, params.w2, params.b, params.c)]
    return "\n".join(lines) + "\n"


def loads_params(text: str) -> NetworkParams:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 5:
        raise ValueError(f"expected header plus 4 rows, got {len(lines)} lines")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        n, seed = int(header["n"]), int(header["seed"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed header {lines[0]!r}") from exc
    rows = [np.array([float(t) for t in ln.split()]) for ln in lines[1:]]
    if any(r.size != n for r in rows):
        raise ValueError(f"row length does not match n={n}")
    return NetworkParams(*rows, seed=seed)


def save_params(params: NetworkParams, path) -> None:
    Path(path).write_text(dumps_params(params))


def load_params(path) -> NetworkParams:
    return loads_params(Path(path).read_text())


def dumps_params_list(params_list) -> str:
    """Several networks as consecutive blocks, in order."""
    return "".join(dumps_params(p) for p in params_list)


def loads_params_list(text: str) -> tuple:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines) % 5:
        raise ValueError(f"expected blocks of 5 lines, got {len(lines)} lines")
    return tuple(loads_params("\n".join(lines[i:i + 5])) for i in range(0, len(lines), 5))

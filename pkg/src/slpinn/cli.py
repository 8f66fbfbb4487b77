"""Command-line experiment runner.

``slpinn run`` trains one model and writes ``trace.csv``, ``surface.csv``,
``errors.json``, ``params.txt``, ``config.txt`` and ``manifest.json`` into the
output directory.  ``slpinn sweep`` runs an epsilon x seed table.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .evaluation import (asym_error_exp1, exact_exp3, norms, solve_reference_fd,
                         surface_dump)
from .models import KIND_CASE, make_model, predict
from .network import dumps_params_list
from .problems import PRESETS, preset
from .training import CollocationGrid, TrainConfig, TrainingDiverged, train

__all__ = ["RunConfig", "ConfigError", "load_config_file", "run", "run_config", "sweep", "main"]

log = logging.getLogger(__name__)

MODEL_CHOICES = {
    "default": None,
    "empirical": "char_empirical",
    "system": "char_system",
    "plain": "plain",
    "compat": "char_compat",
}

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "exp3"
    epsilon: Optional[float] = None
    n: Optional[int] = None
    N: Optional[int] = None
    N_eval: int = 100
    epochs: Optional[int] = None
    lr: Optional[float] = None
    seed: int = 0
    model_kind: str = "default"
    pbl_sign: str = "as-printed"
    out: str = "run"
    deterministic_sequential: bool = False
    workers: int = 1
    fd_check: Optional[int] = None
    forcing: Optional[str] = None
    init_scale: Optional[float] = None

    def validate(self) -> "RunConfig":
        if self.experiment not in PRESETS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(PRESETS)}")
        if self.epsilon is not None and not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.n is not None and self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.N is not None and self.N < 2:
            raise ConfigError(f"N must be >= 2, got {self.N}")
        if self.N_eval < 2:
            raise ConfigError(f"N_eval must be >= 2, got {self.N_eval}")
        if self.epochs is not None and self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr is not None and not self.lr > 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.model_kind not in MODEL_CHOICES:
            raise ConfigError(f"unknown model {self.model_kind!r}; choose from {sorted(MODEL_CHOICES)}")
        if self.pbl_sign not in ("as-printed", "flipped"):
            raise ConfigError(f"pbl_sign must be 'as-printed' or 'flipped', got {self.pbl_sign!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.fd_check is not None and self.fd_check < 33:
            raise ConfigError(f"fd_check needs M >= 33, got {self.fd_check}")
        if self.init_scale is not None and not self.init_scale > 0:
            raise ConfigError(f"init_scale must be positive, got {self.init_scale}")
        return self


_FIELD_TYPES = {"experiment": str, "epsilon": float, "n": int, "N": int, "N_eval": int, "epochs": int,
                "lr": float, "seed": int, "model_kind": str, "pbl_sign": str, "out": str,
                "deterministic_sequential": bool, "workers": int, "fd_check": int, "forcing": str,
                "init_scale": float}


def _coerce(key: str, raw: str):
    typ = _FIELD_TYPES[key]
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if typ is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def dumps_config(cfg: RunConfig) -> str:
    return "".join(f"{f.name} = {getattr(cfg, f.name)}\n" for f in fields(cfg))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve(cfg: RunConfig):
    p = preset(cfg.experiment, f=cfg.forcing, epsilon=cfg.epsilon)
    kind = MODEL_CHOICES[cfg.model_kind] or p.model_kind
    epochs = cfg.epochs if cfg.epochs is not None else p.alternatives.get(kind, p.epochs)
    return p, kind, epochs


def _fd_metrics(model, problem, M: int) -> dict:
    fd = solve_reference_fd(problem, M)
    X, Y = fd.mesh()
    err = predict(model, X, Y).v - fd.values
    l2 = math.sqrt(np.trapezoid(np.trapezoid(err * err, fd.ys, axis=1), fd.xs))
    out = {"fd_M": M, "fd_linf": float(np.max(np.abs(err))), "fd_l2": float(l2)}
    if problem.case == "characteristic":
        zone = (X <= 0.1) & ((Y <= 0.1) | (Y >= 0.9))
        out["fd_corner_linf"] = float(np.max(np.abs(err[zone])))
    return out


def run_config(cfg: RunConfig) -> dict:
    """Train and evaluate; writes the artifacts and returns the error dict.

    Raises :class:`ConfigError` or :class:`TrainingDiverged`.
    """
    cfg.validate()
    try:
        p, kind, epochs = _resolve(cfg)
        problem = p.problem
        nominal = KIND_CASE[kind]
        if nominal is not None and nominal != problem.case:
            raise ConfigError(f"model {kind} is built for the {nominal} case, "
                              f"but {cfg.experiment} is {problem.case}")
        model = make_model(kind, problem, cfg.n or p.n, cfg.seed,
                           pbl_sign=cfg.pbl_sign.replace("-", "_"),
                           init_scale=cfg.init_scale if cfg.init_scale is not None else p.init_scale)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    workers = 1 if cfg.deterministic_sequential else cfg.workers
    N = cfg.N or p.N
    tc = TrainConfig(epochs=epochs, learning_rate=cfg.lr or p.learning_rate, seed=cfg.seed,
                     workers=workers)
    trace = train(model, tc, CollocationGrid(N))
    model = model.with_params(trace.params)
    eps = problem.epsilon

    errors = {"experiment": cfg.experiment, "model_kind": kind, "epsilon": eps,
              "n": model.params[0].n, "N": N, "N_eval": cfg.N_eval, "epochs": epochs,
              "lr": tc.learning_rate, "seed": cfg.seed, "forcing": problem.f.source,
              "final_loss": trace.losses[-1], "l2": None, "linf": None, "energy": None}
    if cfg.experiment == "exp3" and problem.f.source.replace(" ", "") == "sin(pi*y)":
        rep = norms(lambda X, Y: predict(model, X, Y) - exact_exp3(eps, X, Y), cfg.N_eval, epsilon=eps)
        errors.update(l2=rep.l2, linf=rep.linf, energy=rep.energy, reference="exact")
    elif cfg.experiment == "exp1" and problem.f.source.replace(" ", "") == "2-x-y":
        rep = norms(lambda X, Y: asym_error_exp1(model, eps, X, Y), cfg.N_eval)
        errors.update(l2=rep.l2, linf=rep.linf, reference="asymptotic")
    if cfg.fd_check:
        errors.update(_fd_metrics(model, problem, cfg.fd_check))
        if errors["l2"] is None:
            errors.update(l2=errors["fd_l2"], linf=errors["fd_linf"], reference="fd")

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "errors.json": out / "errors.json",
        "params.txt": out / "params.txt",
        "trace.csv": out / "trace.csv",
        "surface.csv": out / "surface.csv",
        "config.txt": out / "config.txt",
    }
    files["errors.json"].write_text(json.dumps(errors, indent=2, sort_keys=True) + "\n")
    files["params.txt"].write_text(dumps_params_list(model.params))
    trace.to_csv(files["trace.csv"])
    surface_dump(lambda X, Y: predict(model, X, Y), cfg.N_eval, files["surface.csv"])
    files["config.txt"].write_text(dumps_config(cfg))
    manifest = {name: {"sha256": _sha256(path), "bytes": path.stat().st_size}
                for name, path in sorted(files.items())}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return errors


def run(cfg: RunConfig) -> int:
    """:func:`run_config` with diagnostics on stderr and an exit status."""
    try:
        run_config(cfg)
    except ConfigError as exc:
        print(f"slpinn: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingDiverged, FloatingPointError) as exc:
        print(f"slpinn: training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


SWEEP_HEADER = ["epsilon", "N", "seed", "l2", "linf", "status"]


def sweep(base: RunConfig, epsilons: Sequence[float], seeds: Sequence[int], table_path,
          median: bool = False, parallel_cells: int = 1) -> List[dict]:
    """Run every (epsilon, seed) cell; failed cells are kept with their status."""
    cells = [(eps, seed) for eps in epsilons for seed in seeds]
    root = Path(base.out)

    def one(cell):
        eps, seed = cell
        cfg = replace(base, epsilon=eps, seed=seed, out=str(root / f"eps{eps:g}_seed{seed}"))
        try:
            e = run_config(cfg)
            return {"epsilon": eps, "N": e["N"], "seed": seed, "l2": e["l2"], "linf": e["linf"],
                    "status": "ok"}
        except (ConfigError, TrainingDiverged, FloatingPointError, RuntimeError) as exc:
            log.warning("cell eps=%g seed=%d failed: %s", eps, seed, exc)
            return {"epsilon": eps, "N": base.N or PRESETS[base.experiment].get("N", 50), "seed": seed,
                    "l2": None, "linf": None, "status": f"failed: {type(exc).__name__}"}

    if parallel_cells > 1:
        with ThreadPoolExecutor(parallel_cells) as ex:
            rows = list(ex.map(one, cells))
    else:
        rows = [one(c) for c in cells]

    if median:
        agg = []
        for eps in epsilons:
            ok = [r for r in rows if r["epsilon"] == eps and r["status"] == "ok"]
            agg.append({"epsilon": eps, "N": ok[0]["N"] if ok else None, "seed": "median",
                        "l2": statistics.median(r["l2"] for r in ok) if ok else None,
                        "linf": statistics.median(r["linf"] for r in ok) if ok else None,
                        "status": f"ok {len(ok)}/{len(seeds)}"})
        rows = agg

    Path(table_path).parent.mkdir(parents=True, exist_ok=True)
    with open(table_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, SWEEP_HEADER, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r[k] is None else (repr(r[k]) if isinstance(r[k], float) else r[k]))
                        for k in SWEEP_HEADER})
    return rows


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--experiment", choices=sorted(PRESETS))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--grid", type=int, dest="N", help="collocation grid size N")
    p.add_argument("--eval-grid", type=int, dest="N_eval")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--model", dest="model_kind", choices=sorted(MODEL_CHOICES))
    p.add_argument("--pbl-sign", dest="pbl_sign", choices=["as-printed", "flipped"])
    p.add_argument("--out")
    p.add_argument("--deterministic-sequential", dest="deterministic_sequential",
                   action="store_true", default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--fd-check", dest="fd_check", type=int, metavar="M")
    p.add_argument("--forcing", help="forcing expression in x, y (sin, cos, exp, pi)")
    p.add_argument("--init-scale", dest="init_scale", type=float)


def _config_from_args(args) -> RunConfig:
    values = load_config_file(args.config) if args.config else {}
    for key in _FIELD_TYPES:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values).validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slpinn", description="SL-PINN experiment runner")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="train and evaluate one configuration"))
    sp = sub.add_parser("sweep", help="epsilon x seed table")
    _add_run_flags(sp)
    sp.add_argument("--epsilons", default="", help="comma-separated list")
    sp.add_argument("--seeds", default="0", help="comma-separated list")
    sp.add_argument("--table", help="output CSV (default <out>/table.csv)")
    sp.add_argument("--median", action="store_true", help="aggregate seeds by median")
    sp.add_argument("--parallel-cells", type=int, default=1)
    return parser


def _parse_list(text: str, typ):
    return [typ(t) for t in text.split(",") if t.strip()]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"slpinn: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        return run(cfg)
    try:
        epsilons = _parse_list(args.epsilons, float)
        seeds = _parse_list(args.seeds, int)
    except ValueError as exc:
        print(f"slpinn: invalid list: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    table = args.table or str(Path(cfg.out) / "table.csv")
    rows = sweep(cfg, epsilons, seeds, table, median=args.median, parallel_cells=args.parallel_cells)
    return EXIT_OK if all(r["status"].startswith("ok") for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled and numpy kernel backends on one loss/gradient evaluation.

    python benchmarks/bench_kernels.py [--repeat 20]

Reports median wall time per ``value_and_grad`` call for each backend and
model kind, plus the largest relative difference between the two gradients.
"""
import argparse
import time

import numpy as np

from slpinn.kernels import get_backend
from slpinn.models import make_model
from slpinn.problems import preset
from slpinn.training import CollocationGrid, CompiledLoss

CASES = [("exp1", None), ("exp3", None), ("exp4", "char_system")]


def _median_time(fn, repeat):
    fn()  # warm-up
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--grid", type=int, default=50)
    args = ap.parse_args(argv)

    try:
        get_backend("cython")
        backends = ["numpy", "cython"]
    except ImportError:
        print("compiled extension not built; timing the numpy backend only")
        backends = ["numpy"]

    print(f"{'case':<22}{'backend':<9}{'ms/call':>10}{'speedup':>10}{'max rel diff':>15}")
    for exp_id, kind in CASES:
        p = preset(exp_id)
        kind = kind or p.model_kind
        m = make_model(kind, p.problem, args.n, 0, init_scale=p.init_scale)
        grid = CollocationGrid(args.grid)
        times, grads = {}, {}
        for name in backends:
            cl = CompiledLoss(m, grid, backend=name)
            times[name] = _median_time(cl.value_and_grad, args.repeat)
            grads[name] = np.concatenate([np.ravel(g) for g in _flat(cl.value_and_grad()[1])])
        for name in backends:
            speed = times["numpy"] / times[name]
            diff = ""
            if name != "numpy":
                ref = grads["numpy"]
                diff = f"{np.max(np.abs(grads[name] - ref)) / max(np.max(np.abs(ref)), 1e-300):.2e}"
            print(f"{exp_id + '/' + kind:<22}{name:<9}{1e3 * times[name]:>10.2f}{speed:>10.1f}{diff:>15}")


def _flat(grad):
    for g in grad:
        if hasattr(g, "w1"):
            yield from (g.w1, g.w2, g.b, g.c)
        else:
            yield g


if __name__ == "__main__":
    main()

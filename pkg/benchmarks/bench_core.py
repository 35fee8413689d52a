"""Compare the compiled core with the numpy fallback.

Times coefficient building, one observed scan and the Monte Carlo null
simulation for a few sample sizes, and checks both backends agree.

    python benchmarks/bench_core.py [--sizes 50,100,200] [--mc 999] [--repeat 3]
"""

import argparse
import time

import numpy as np

from msrank import _backend
from msrank.calibration import simulate_null
from msrank.kernels import make_kernel
from msrank.ranks import Dataset
from msrank.statistic import build_coefficients, scan


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,200")
    ap.add_argument("--mc", type=int, default=999)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    kern = make_kernel("epanechnikov")
    backends = ["python"]
    try:
        _backend.use("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled core not built; timing the numpy fallback only")
    print(f"{'n':>5} {'backend':>8} {'build s':>9} {'scan s':>9} {'null s':>9}")
    for n in (int(s) for s in args.sizes.split(",")):
        r = np.random.default_rng(n)
        d = Dataset(np.arange(1, n + 1) / n, r.standard_t(3, n))
        nulls = {}
        for name in backends:
            _backend.use(name)
            tb, table = best_of(lambda: build_coefficients(d, kern), args.repeat)
            ts, _ = best_of(lambda: scan(table, d.signs()), args.repeat)
            tn, nulls[name] = best_of(lambda: simulate_null(table, args.mc, seed=1, threads=args.threads), args.repeat)
            print(f"{n:>5} {name:>8} {tb:>9.4f} {ts:>9.4f} {tn:>9.4f}")
        if len(nulls) == 2:
            diff = float(np.max(np.abs(nulls["cython"] - nulls["python"])))
            print(f"{n:>5} max |null difference| between backends: {diff:.2e}")
    _backend.use(backends[0])


if __name__ == "__main__":
    main()

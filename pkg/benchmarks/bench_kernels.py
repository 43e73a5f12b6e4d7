"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and size with the best wall time of each
backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from framelab import _kernels_py

try:
    from framelab import _kernels as compiled
except ImportError:
    compiled = None


def cases(rng):
    for d in (8, 32, 64):
        b = rng.standard_normal((d, d))
        a = np.ascontiguousarray(b + b.T)
        yield f"jacobi_eigh d={d}", lambda m, a=a: m.jacobi_eigh(a, 1e-13, 100)
    for n, d in ((100, 3), (1000, 8), (20, 4)):
        x = rng.standard_normal((n, d))
        t = np.eye(d) / d
        out = np.empty((d, d))
        yield f"gram_deviation n={n} d={d}", lambda m, x=x, t=t, out=out, n=n: m.gram_deviation(x, t, float(n), out)
    re, im = rng.standard_normal((2, 20, 4))
    t = np.eye(4) / 4
    out = np.empty((4, 4))
    yield "hermitian_gram_deviation n=20 d=4", lambda m: m.hermitian_gram_deviation(re, im, t, 20.0, out)


def best(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, call in cases(rng):
        tp = best(lambda: call(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:38s} {tp * 1e6:10.1f}us {'n/a':>12s}")
            continue
        tc = best(lambda: call(compiled), args.repeat)
        print(f"{name:38s} {tp * 1e6:10.1f}us {tc * 1e6:10.1f}us {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()

"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Prints one row per (kernel, size) with the best-of-repeat time of each
backend and the speedup.  Outputs of the two backends are compared as well.
"""

import argparse
import time

import numpy as np

from rumorsource import _pykernels as pure
from rumorsource.generators import random_recursive_tree, regular_tree, small_world
from rumorsource.rng import UniformStream

try:
    from rumorsource import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None


def best(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(x, y, rtol=1e-12, atol=1e-9, equal_nan=True) if isinstance(x, np.ndarray) else x == y
               for x, y in zip(a, b))


def cases(quick):
    sizes = (1_000, 10_000) if quick else (1_000, 10_000, 100_000)
    for n in sizes:
        t = random_recursive_tree(n, seed=n)
        yield "tree_scores", n, lambda k, t=t: k.tree_scores(t.indptr, t.indices, 0)
        yield "tree_log_r", n, lambda k, t=t: k.tree_log_r(t.indptr, t.indices, 0)
    sw = small_world(2000, 4, 0.1, seed=1)
    order = compiled.spread_count(sw.indptr, sw.indices, 0, 400, UniformStream.from_seed(1))[0] if compiled else \
        pure.spread_count(sw.indptr, sw.indices, 0, 400, UniformStream.from_seed(1))[0]
    pos = np.sort(order)
    ip, ix = sw.induced_csr(pos)
    deg = sw.degrees[pos]
    yield "bfs_scores", 400, lambda k: k.bfs_scores(ip, ix, deg)
    host = regular_tree(3, 14)
    for n in (400, 5_000):
        yield "spread_count", n, lambda k, n=n: k.spread_count(host.indptr, host.indices, 0, n, UniformStream.from_seed(7))
        yield "spread_count_regular", n, lambda k, n=n: k.spread_count_regular(3, n, UniformStream.from_seed(7))
    yield "spread_time", 8, lambda k: k.spread_time(host.indptr, host.indices, 0, 8.0, UniformStream.from_seed(7))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    print(f"{'kernel':<22}{'size':>8}{'python s':>12}{'compiled s':>12}{'speedup':>9}  match")
    for name, n, fn in cases(args.quick):
        tp, op = best(lambda: fn(pure), args.repeat)
        if compiled is None:
            print(f"{name:<22}{n:>8}{tp:>12.4f}{'-':>12}{'-':>9}  -")
            continue
        tc, oc = best(lambda: fn(compiled), args.repeat)
        print(f"{name:<22}{n:>8}{tp:>12.4f}{tc:>12.5f}{tp / tc:>8.1f}x  {'yes' if same(op, oc) else 'NO'}")


if __name__ == "__main__":
    main()

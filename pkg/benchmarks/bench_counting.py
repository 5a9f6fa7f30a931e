"""Benchmark the compiled neighbor-counting kernel against the numpy fallback.

Usage: python3 benchmarks/bench_counting.py [--sizes 2000,10000,50000] [--d 3]

Neighbor counting dominates the runtime of every Monte Carlo experiment, so
the kernel choice is the main performance lever of the package.
"""

import argparse
import time

import numpy as np

from epsball import spatial
from epsball.spatial import GridIndex


def _kernels():
    out = [("python", spatial._countpy)]
    try:
        from epsball import _countcore
        out.append(("compiled", _countcore))
    except ImportError:
        pass
    return out


def bench(n: int, d: int, eps: float, repeats: int = 3) -> dict:
    rng = np.random.default_rng(1234)
    pts = rng.uniform(size=(n, d))
    results = {}
    counts = {}
    for name, kernel in _kernels():
        idx = GridIndex(pts, eps, kernel=kernel)
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            c = idx.count_radius(pts)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
        counts[name] = c
    vals = list(counts.values())
    if len(vals) == 2 and not np.array_equal(vals[0], vals[1]):
        raise AssertionError("kernels disagree -- benchmark aborted")
    return results


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="2000,10000,50000")
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"active kernel at import: {spatial.KERNEL_NAME}")
    print(f"{'n':>8} {'d':>3} {'eps':>7} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for n in sizes:
        # keep the expected neighborhood size roughly constant across n
        eps = 0.5 * (100 / n) ** (1 / args.d)
        res = bench(n, args.d, eps, args.repeats)
        py = res["python"]
        cc = res.get("compiled")
        cc_txt = f"{cc:10.4f}" if cc is not None else "       n/a"
        ratio = f"{py / cc:7.1f}x" if cc else "     n/a"
        print(f"{n:>8} {args.d:>3} {eps:7.4f} {py:10.4f} {cc_txt} {ratio}")


if __name__ == "__main__":
    main()

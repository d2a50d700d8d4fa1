"""Compare the compiled pairwise kernels against the numpy reference.

Times the momentum and stream sums at a few ensemble sizes, all-pairs
(targets == sources), and checks that the two backends agree. Run as

    python benchmarks/bench_kernels.py [--sizes 500 2000 8000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from cornerflow import _backend


def make_case(n, rng):
    # exterior-style mapped positions: annulus 1.2 < |zeta| < 3
    r = rng.uniform(1.2, 3.0, n)
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    z = np.ascontiguousarray(r * np.exp(1j * th))
    gam = np.ascontiguousarray(rng.uniform(-1.0, 1.0, n) / n)
    dl2 = np.full(n, 1e-4)
    return z, gam, dl2


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000, 8000])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = _backend.available_backends()
    if "fast" not in backends:
        print("compiled backend unavailable; timing the reference only")
    rng = np.random.default_rng(7)

    header = f"{'n':>6}  {'kernel':>8}"
    for name in backends:
        header += f"  {name + ' [ms]':>12}"
    if len(backends) == 2:
        header += f"  {'speedup':>8}  {'max |diff|':>10}"
    print(header)

    for n in args.sizes:
        z, gam, dl2 = make_case(n, rng)
        for kernel in ("momentum", "stream"):
            row = f"{n:>6}  {kernel:>8}"
            results = {}
            times = {}
            for name in backends:
                mod = backends[name]
                if kernel == "momentum":
                    fn = lambda: mod.momentum_sum(z, z, gam, dl2, 0.5, True)
                else:
                    fn = lambda: mod.stream_sum(z, z, gam, dl2, 0.5)
                results[name] = fn()
                times[name] = best_of(fn, args.repeats)
                row += f"  {times[name] * 1e3:>12.3f}"
            if len(backends) == 2:
                diff = float(np.max(np.abs(results["fast"] - results["ref"])))
                row += f"  {times['ref'] / times['fast']:>8.2f}  {diff:>10.2e}"
            print(row)


if __name__ == "__main__":
    main()

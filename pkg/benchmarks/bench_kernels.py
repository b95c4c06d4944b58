"""Time the compiled kernels against their pure-Python twins.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per (kernel, size) with the best-of-repeat wall time of each
backend and the speedup. Exits with status 1 if the extension is not built.
"""
import argparse
import sys
import timeit

import numpy as np

from principal_points import _kernels_py

try:
    from principal_points import _kernels
except ImportError:
    _kernels = None


def tridiagonal_case(n, rng):
    off = -rng.uniform(0.1, 0.4, n - 1)
    diag = 1.0 + rng.uniform(0.0, 1.0, n)  # diagonally dominant
    return diag, off, rng.standard_normal(n)


def partition_case(grid, rng):
    x = np.sort(rng.standard_normal(grid))
    w = rng.uniform(0.5, 1.5, grid)
    return w / w.sum(), x


def best_time(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; rebuild with Cython installed", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    cases = [("thomas_solve", f"n={n}", tridiagonal_case(n, rng)) for n in (16, 100, 1000, 10_000)]
    cases += [("dp_partition", f"G={g}, n=4", (*partition_case(g, rng), 4)) for g in (500, 2000)]

    print(f"{'kernel':<14}{'size':<14}{'python [s]':>13}{'cython [s]':>13}{'speedup':>10}")
    for name, label, case in cases:
        slow, fast = getattr(_kernels_py, name), getattr(_kernels, name)
        np.testing.assert_allclose(fast(*case), slow(*case), rtol=1e-12, atol=1e-12)
        t_py = best_time(slow, case, args.repeat)
        t_cy = best_time(fast, case, args.repeat)
        print(f"{name:<14}{label:<14}{t_py:>13.3e}{t_cy:>13.3e}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

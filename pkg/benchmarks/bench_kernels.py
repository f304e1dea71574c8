"""Time the two hot loops with both backends.

    python3 benchmarks/bench_kernels.py [--repeat 20]

The numba column is empty when numba is unavailable or ELLQG_NO_NUMBA=1 is set.
"""

import argparse
import timeit

import numpy as np

from ellqg import _kernels
from ellqg.weight_functions import block_assignments


def _cases(rng):
    for size in (64, 1024, 16384):
        t0 = rng.uniform(-0.5, 0.5, size) + 1j * rng.uniform(-0.5, 0.5, size)
        yield f"theta series  n={size}", "_theta_series", (t0, 0.2 + 0.8j, 12)
    for M in ((2, 2), (2, 2, 2), (3, 2, 2, 1)):
        m = sum(M)
        a = block_assignments(M)
        f = rng.normal(size=(m, len(M))) + 1j * rng.normal(size=(m, len(M)))
        g = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        yield f"assignment sum M={M} ({len(a)} terms)", "_assignment_sum", (a, f, g, False)


def _best(fn, args, repeat):
    fn(*args)  # warm-up, includes JIT compilation
    number = 5
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"numba backend: {'on' if _kernels.USE_NUMBA else 'off'}")
    print(f"{'case':<42}{'numpy [us]':>12}{'numba [us]':>12}{'speedup':>9}")
    for label, name, fargs in _cases(rng):
        t_np = _best(getattr(_kernels, name + "_np"), fargs, args.repeat)
        if _kernels.USE_NUMBA:
            t_nb = _best(getattr(_kernels, name + "_nb"), fargs, args.repeat)
            print(f"{label:<42}{t_np * 1e6:>12.1f}{t_nb * 1e6:>12.1f}{t_np / t_nb:>8.1f}x")
        else:
            print(f"{label:<42}{t_np * 1e6:>12.1f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()

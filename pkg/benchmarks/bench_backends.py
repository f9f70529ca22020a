"""Time the compiled kernel core against the numpy fallback.

Run with ``python benchmarks/bench_backends.py``. Prints the best of several
repeats for each hot kernel and the speed ratio.
"""

import argparse
import timeit

import numpy as np

from tpqsf import _kernels_py
from tpqsf.quadrature import fully_symmetric_points

try:
    from tpqsf import _kernels_cy
except ImportError:  # extension not built
    _kernels_cy = None


def cases(d, n_pairs, seed=0):
    rng = np.random.default_rng(seed)
    U = np.ascontiguousarray(fully_symmetric_points(d).points.T)
    xi = rng.standard_normal((n_pairs, d))
    eta = rng.standard_normal((n_pairs, d))
    il = np.ascontiguousarray(1.0 / rng.uniform(0.5, 3.0, d))
    X = rng.standard_normal((200, d))
    return {
        "rbf_cross 200x200": lambda m: m.rbf_cross(X, X, 1.0, il),
        f"mc_accumulate {n_pairs} pairs": lambda m: m.mc_accumulate(xi, eta, U, 1.0, il),
    }


def best(fn, mod, repeat):
    return min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--pairs", type=int, default=1 << 15)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels_cy is None:
        print("compiled core not built; nothing to compare")
        return 1
    print(f"{'kernel':<28}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in cases(args.dim, args.pairs).items():
        tp = best(fn, _kernels_py, args.repeat)
        tc = best(fn, _kernels_cy, args.repeat)
        print(f"{name:<28}{1e3 * tp:>12.2f}{1e3 * tc:>13.2f}{tp / tc:>9.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

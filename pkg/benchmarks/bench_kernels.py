"""Compare the compiled reduction kernels with the NumPy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--days N] [--repeat R]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ehplan.scenarios import _kernels_py

try:
    from ehplan.scenarios import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--days", type=int, default=365)
    ap.add_argument("--features", type=int, default=120)
    ap.add_argument("--target", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    X = rng.random((args.days, args.features))
    p = np.full(args.days, 1.0 / args.days)
    C = X[rng.choice(args.days, args.target, replace=False)]
    D = _kernels_py.pairwise_distances(X)

    cases = {
        "pairwise_distances": lambda k: k.pairwise_distances(X),
        "backward_reduce": lambda k: k.backward_reduce(D, p, args.target),
        "kmeans_assign": lambda k: k.kmeans_assign(X, C),
    }
    print(f"{args.days} days x {args.features} features, target {args.target}, best of {args.repeat}")
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in cases.items():
        t_py = best_of(lambda: call(_kernels_py), args.repeat)
        if _kernels_c is None:
            print(f"{name:<20}{1e3 * t_py:>14.2f}{'n/a':>14}{'':>10}")
            continue
        ref, got = call(_kernels_py), call(_kernels_c)
        for a, b in zip(ref if isinstance(ref, tuple) else (ref,), got if isinstance(got, tuple) else (got,)):
            assert np.allclose(a, b), f"{name}: compiled and fallback results differ"
        t_c = best_of(lambda: call(_kernels_c), args.repeat)
        print(f"{name:<20}{1e3 * t_py:>14.2f}{1e3 * t_c:>14.2f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()

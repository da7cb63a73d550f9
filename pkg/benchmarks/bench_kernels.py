"""Time the numba and numpy pair/distance kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--sizes 257 1025 2049] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from svcalc import _kernels


def bench(fn, *args, repeat: int) -> float:
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[257, 1025, 2049])
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    rng = np.random.default_rng(0)
    # compile once outside the timings
    warm = rng.uniform(size=(4, args.dim))
    _kernels.pair_indices_numba(warm, warm, 1e-9)
    _kernels.nearest_dist_numba(warm, warm)

    print(f"{'kernel':<14}{'|A|=|B|':>9}{'numpy ms':>12}{'numba ms':>12}{'speedup':>9}")
    for n in args.sizes:
        A = rng.uniform(-1, 1, (n, args.dim))
        B = rng.uniform(-1, 1, (n, args.dim))
        same = all(
            np.array_equal(x, y)
            for x, y in zip(_kernels.pair_indices_numpy(A, B, 1e-9), _kernels.pair_indices_numba(A, B, 1e-9))
        )
        assert same, "kernels disagree"
        for name, np_fn, nb_fn, extra in (
            ("pair_indices", _kernels.pair_indices_numpy, _kernels.pair_indices_numba, (1e-9,)),
            ("nearest_dist", _kernels.nearest_dist_numpy, _kernels.nearest_dist_numba, ()),
        ):
            t_np = bench(np_fn, A, B, *extra, repeat=args.repeat) * 1e3
            t_nb = bench(nb_fn, A, B, *extra, repeat=args.repeat) * 1e3
            print(f"{name:<14}{n:>9}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

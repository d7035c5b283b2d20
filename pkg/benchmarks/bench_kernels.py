"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once first so numba compilation is not timed.
"""

import argparse
import timeit

import numpy as np

from haarint.kernels import numba_impl, numpy_impl


def cases(gen):
    G = (gen.standard_normal((20000, 32, 2)) + 1j * gen.standard_normal((20000, 32, 2))) / np.sqrt(2)
    A = numpy_impl.orthonormal_frames(
        (gen.standard_normal((20000, 8, 3)) + 1j * gen.standard_normal((20000, 8, 3))) / np.sqrt(2)
    )[:, :3, :3].copy()
    B = A[::-1].copy()
    M = (gen.random((8, 8)) < 0.5).astype(np.int64)
    nodes, weights = np.polynomial.legendre.leggauss(20)
    r, rh, ct = (gen.random(50000) * 0.7 for _ in range(3))
    return {
        "orthonormal_frames (20000 x 32x2)": ("orthonormal_frames", (G,)),
        "logdet_one_minus_gram (20000 x 3x3)": ("logdet_one_minus_gram", (A,)),
        "t_functional (20000 x 3x3)": ("t_functional", (A, B)),
        "permanent (8x8)": ("permanent", (M,)),
        "q2_inner (50000 points, 20 nodes)": ("q2_inner", (r, rh, ct, 8, nodes, weights)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")
    gen = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for label, (name, call_args) in cases(gen).items():
        row = []
        for impl in (numpy_impl, numba_impl):
            fn = getattr(impl, name)
            fn(*call_args)
            row.append(min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat)) * 1e3)
        print(f"{label:40s} {row[0]:10.2f} {row[1]:10.2f} {row[0] / row[1]:8.1f}x")


if __name__ == "__main__":
    main()

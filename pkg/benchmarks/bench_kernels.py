"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--n 2000] [--m 10] [--d 20] [--repeat 5]

Each kernel is called once before timing so JIT compilation is excluded.
With numba disabled (SLAMRANK_DISABLE_NUMBA=1) only the numpy column is shown.
"""

import argparse
import timeit

import numpy as np

from slamrank import kernels
from slamrank.data import SyntheticSpec, generate_synthetic
from slamrank.measures import NDCG


def cases(n, m, d, seed):
    rng = np.random.default_rng(seed)
    ds = generate_synthetic(SyntheticSpec(n=n, m=m, d=d, gamma=0.0, grades=(0, 1, 2, 3), noise=0.5,
                                          seed=seed)).dataset
    X, R, offsets = ds.packed()
    V = ds.weights(NDCG)
    S = rng.standard_normal((n, m))
    Rm = R.reshape(n, m)
    Vm = V.reshape(n, m)
    Rb = (Rm > 1).astype(np.int64)
    K = np.full(n, min(3, m), dtype=np.int64)
    w = rng.standard_normal(d) * 0.1
    visit = rng.permutation(n).astype(np.int64)
    snaps = np.array([n // 2, n], dtype=np.int64)

    def sgd(impl):
        return impl.sgd_epoch(X, R, V, offsets, visit, w.copy(), 0.01, 10.0, 2.02, 0, 1.0,
                              np.zeros(d), snaps)

    return {
        "ndcg_rows": lambda impl: impl.ndcg_rows(S, Rm),
        "map_rows": lambda impl: impl.map_rows(S, Rb),
        "weights_rows": lambda impl: impl.weights_rows(Rm, kernels.NDCG_K, K),
        "slam_rows": lambda impl: impl.slam_rows(S, Rm, Vm, 1.0),
        "ranksvm_rows": lambda impl: impl.ranksvm_rows(S, Rb),
        "slam_ragged": lambda impl: impl.slam_ragged(X, R, V, offsets, w, 1.0),
        "sgd_epoch": sgd,
    }


def best_time(fn, impl, repeat):
    fn(impl)  # warm-up / compile
    return min(timeit.repeat(lambda: fn(impl), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="queries")
    ap.add_argument("--m", type=int, default=10, help="documents per query")
    ap.add_argument("--d", type=int, default=20, help="features")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = [("numpy", kernels.numpy_impl)]
    if kernels.numba_impl is not None:
        impls.append(("numba", kernels.numba_impl))
    print(f"backend={kernels.BACKEND} n={args.n} m={args.m} d={args.d} repeat={args.repeat}")
    header = f"{'kernel':<14}" + "".join(f"{name + ' ms':>12}" for name, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, fn in cases(args.n, args.m, args.d, args.seed).items():
        times = [best_time(fn, impl, args.repeat) * 1e3 for _, impl in impls]
        row = f"{name:<14}" + "".join(f"{t:>12.3f}" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

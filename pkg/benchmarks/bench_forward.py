"""Compare the compiled forward kernel against the numpy fallback.

Usage: python benchmarks/bench_forward.py [--reps N]
Also cross-checks that both kernels agree to 1e-12 relative.
"""

import argparse
import time

import numpy as np

from reconfig import _pyforward, kernels
from reconfig.pathway import random_network

SHAPES = [
    ("small  (8 -> 16 -> 4)", [8, 16, 4]),
    ("medium (64 -> 128 -> 32)", [64, 128, 32]),
    ("large  (256 -> 512 -> 512 -> 64)", [256, 512, 512, 64]),
]


def bench(impl, net, xs, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        for x in xs:
            impl.forward(net.layers, net.sigma, x)
    return (time.perf_counter() - t0) / (reps * len(xs))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"selected backend: {kernels.BACKEND}")
    if kernels.BACKEND == "python":
        print("compiled kernel not built; timing the fallback against itself")
    header = f"{'shape':35} {'compiled':>12} {'python':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, dims in SHAPES:
        net = random_network(rng, dims, "logistic-sigmoid")
        xs = [rng.standard_normal(dims[0]) for _ in range(50)]
        for x in xs:
            a = kernels.forward(net.layers, net.sigma, x)
            b = _pyforward.forward(net.layers, net.sigma, x)
            np.testing.assert_allclose(a, b, rtol=1e-12)
        t_sel = bench(kernels, net, xs, args.reps)
        t_py = bench(_pyforward, net, xs, args.reps)
        print(f"{name:35} {t_sel * 1e6:10.2f}us {t_py * 1e6:10.2f}us "
              f"{t_py / t_sel:8.2f}x")


if __name__ == "__main__":
    main()

"""Compare the Cython kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--batch 64]

Each row times forward+inverse over a batch of signals, then one Gram
matrix, once per backend. The numbers are medians of ``--repeat`` runs.
"""
import argparse
import statistics
import time

import numpy as np

from transtonal import _backend, _pykernels, transforms


def median_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases(batch):
    rng = np.random.default_rng(0)
    for n in (1024, 4096):
        x = rng.standard_normal((batch, n))
        for plan in (transforms.wavelet_plan(n), transforms.cosine_plan(n), transforms.wavelet_plan(n, "db10")):
            yield f"roundtrip {plan.describe()} x{batch}", lambda p=plan, x=x: transforms.inverse_array(p, transforms.forward_array(p, x))
    for n in (512, 1024):
        yield f"gram N={n}", lambda n=n: transforms.gram(transforms.wavelet_plan(n), transforms.cosine_plan(n))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=64)
    args = ap.parse_args()
    if _backend.NAME != "cython":
        raise SystemExit("the Cython extension is not built; run `pip install -e . --no-build-isolation` first")
    compiled = transforms.kernels
    print(f"{'case':56s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(args.batch):
        transforms.kernels = _pykernels
        t_py = median_time(fn, args.repeat)
        transforms.kernels = compiled
        t_cy = median_time(fn, args.repeat)
        print(f"{name:56s} {1e3 * t_py:11.2f} {1e3 * t_cy:12.2f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()

"""Benchmark the numba kernels against the pure-numpy fallback.

Times the hot operations (resampling, JPEG round trip, SSIM, the full
purification pipeline) under both backends on the same inputs.

Run: python benchmarks/bench_kernels.py [--size 512] [--runs 5]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from helpers import make_portrait  # noqa: E402

from purikit import kernels  # noqa: E402
from purikit.metrics import ssim  # noqa: E402
from purikit.purify import PurifyParams, purify  # noqa: E402
from purikit.transforms import LANCZOS3, jpeg_roundtrip, resample  # noqa: E402


def _time(fn, runs):
    best = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        best.append(time.perf_counter() - t0)
    return min(best), float(np.mean(best))


def run_benchmarks(size, runs):
    img = make_portrait(0, size)
    half = size // 2
    params = PurifyParams()

    ops = {
        f"resample {size}->{half} lanczos3": lambda: resample(img, half, half, LANCZOS3),
        f"resample {half}->{size} lanczos3": lambda: resample(
            resample(img, half, half, LANCZOS3), size, size, LANCZOS3),
        f"jpeg q75 roundtrip {size}px": lambda: jpeg_roundtrip(img, 75),
        f"ssim {size}px": lambda: ssim(img, img),
        f"purify {size}px (default)": lambda: purify(img, params),
    }

    results = {}
    for backend in ("numba", "numpy"):
        try:
            kernels.use_backend(backend)
        except ImportError:
            print(f"{backend} backend unavailable, skipping")
            continue
        for name, fn in ops.items():
            fn()  # warm-up (JIT compile / cache load)
            best, mean = _time(fn, runs)
            results.setdefault(name, {})[backend] = (best, mean)

    width = max(len(n) for n in results)
    print(f"\n{'operation':<{width}}  {'numba best':>11}  {'numpy best':>11}  speedup")
    for name, per in results.items():
        nb = per.get("numba")
        npb = per.get("numpy")
        nb_s = f"{nb[0] * 1000:9.1f} ms" if nb else "        n/a"
        np_s = f"{npb[0] * 1000:9.1f} ms" if npb else "        n/a"
        ratio = f"{npb[0] / nb[0]:6.2f}x" if nb and npb else "    n/a"
        print(f"{name:<{width}}  {nb_s}  {np_s}  {ratio}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--runs", type=int, default=5)
    args = parser.parse_args()
    run_benchmarks(args.size, args.runs)


if __name__ == "__main__":
    main()

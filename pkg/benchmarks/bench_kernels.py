"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

from emgarm.kernels import available_backends
from emgarm.dataset import make_synthetic_windows
from emgarm.gestures import Gesture
from emgarm.rendering import render_graph


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_synth(impl, repeats):
    return _time(lambda: impl.synth_channel(55.0, 42, 8000), repeats)


def bench_polyline(impl, repeats):
    win = make_synthetic_windows(Gesture.FIST, 42, 1)[0]
    xs = [2 + round(i * 123 / 39) for i in range(40)]

    def run():
        buf = bytearray(b"\xff" * (256 * 256))
        for row in win.samples:
            ys = [2 + round((127 - v) * 59 / 255) for v in row]
            impl.draw_polyline(buf, 256, xs, ys, 0)

    return _time(run, repeats)


def bench_patch_stats(impl, repeats):
    win = make_synthetic_windows(Gesture.FIST, 42, 1)[0]
    pixels = render_graph(win).pixels
    return _time(lambda: impl.patch_stats(pixels, 256, 256, 16), repeats)


BENCHES = [
    ("synth_channel (8000 samples)", bench_synth),
    ("draw_polyline (8 channels)", bench_polyline),
    ("patch_stats (256x256)", bench_patch_stats),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    backends = available_backends()
    if "native" not in backends:
        print("compiled backend not built; run "
              "`python setup.py build_ext --inplace` first")
    print(f"{'kernel':34} {'pure':>10} {'native':>10} {'speedup':>8}")
    for name, bench in BENCHES:
        pure_s = bench(backends["pure"], args.repeats)
        row = f"{name:34} {pure_s * 1e3:9.3f}ms"
        if "native" in backends:
            native_s = bench(backends["native"], args.repeats)
            row += f" {native_s * 1e3:9.3f}ms {pure_s / native_s:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()

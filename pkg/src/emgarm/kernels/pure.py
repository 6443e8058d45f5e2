"""Pure-Python kernel implementations.

These are the fallback for the compiled extension in ``_native``; both
must produce bit-identical output (the parity tests enforce this).
Integer arithmetic is exact by construction; the float formulas are
written as the same IEEE-754 operation sequences the C code uses.
"""

from __future__ import annotations

import math

import numpy as np

from ..rng import SplitMix64, round_half_away

BACKEND = "pure"


def synth_channel(rms: float, seed: int, n: int) -> np.ndarray:
    """n clamped int8 samples of zero-mean Gaussian noise at the given RMS."""
    out = np.empty(n, dtype=np.int8)
    rng = SplitMix64(seed)
    for i in range(n):
        v = rms * rng.next_gauss()
        if v > 127.0:
            v = 127.0
        elif v < -128.0:
            v = -128.0
        out[i] = round_half_away(v)
    return out


def draw_polyline(buf: bytearray, width: int, xs, ys, value: int) -> None:
    """Join consecutive (x, y) points with Bresenham segments in-place."""
    n = len(xs)
    for i in range(n - 1):
        x0, y0, x1, y1 = xs[i], ys[i], xs[i + 1], ys[i + 1]
        dx = abs(x1 - x0)
        sx = 1 if x0 < x1 else -1
        dy = -abs(y1 - y0)
        sy = 1 if y0 < y1 else -1
        err = dx + dy
        while True:
            buf[y0 * width + x0] = value
            if x0 == x1 and y0 == y1:
                break
            e2 = 2 * err
            if e2 >= dy:
                err += dy
                x0 += sx
            if e2 <= dx:
                err += dx
                y0 += sy
    if n == 1:
        buf[ys[0] * width + xs[0]] = value


def patch_stats(pixels, width: int, height: int, patch: int) -> np.ndarray:
    """Interleaved (mean/255, population-std/128) per patch, row-major.

    Patch sums are exact integer reductions, so the only float ops are
    the final per-patch normalizations — identical to the C sequence.
    """
    px = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)
    rows = height // patch
    cols = width // patch
    blocks = px.reshape(rows, patch, cols, patch).astype(np.int64)
    s = blocks.sum(axis=(1, 3), dtype=np.int64)
    q = (blocks * blocks).sum(axis=(1, 3), dtype=np.int64)

    area = float(patch * patch)
    out = np.empty(rows * cols * 2, dtype=np.float64)
    k = 0
    for r in range(rows):
        for c in range(cols):
            mean = s[r, c] / area
            var = q[r, c] / area - mean * mean
            if var < 0.0:
                var = 0.0
            out[k] = mean / 255.0
            out[k + 1] = math.sqrt(var) / 128.0
            k += 2
    return out

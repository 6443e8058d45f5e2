# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel implementations (hot inner loops).

Semantics are pinned by the pure-Python twins in ``pure.py``; the
parity tests require bit-identical output from both backends.
"""

from libc.math cimport ceil, cos, floor, log, sqrt

import numpy as np

BACKEND = "native"

cdef extern from *:
    """
    #include <stdint.h>

    static const uint64_t SM64_GOLDEN = 0x9E3779B97F4A7C15ULL;

    static inline uint64_t sm64_next(uint64_t *state) {
        *state += SM64_GOLDEN;
        uint64_t z = *state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    ctypedef unsigned long long uint64_t
    uint64_t sm64_next(uint64_t *state) nogil

DEF TWO_PI = 6.283185307179586
DEF INV_TWO53 = 1.1102230246251565e-16  # 2**-53


cdef inline double _uniform(uint64_t *state) nogil:
    # 53-bit uniform in (0, 1]; never 0, so log() stays finite.
    return <double>((sm64_next(state) >> 11) + 1) * INV_TWO53


cdef inline double _gauss(uint64_t *state) nogil:
    cdef double u1 = _uniform(state)
    cdef double u2 = _uniform(state)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


cdef inline long _round_half_away(double x) nogil:
    if x >= 0.0:
        return <long>floor(x + 0.5)
    return <long>ceil(x - 0.5)


def synth_channel(double rms, unsigned long long seed, Py_ssize_t n):
    """n clamped int8 samples of zero-mean Gaussian noise at the given RMS."""
    out = np.empty(n, dtype=np.int8)
    cdef signed char[::1] view = out
    cdef uint64_t state = seed
    cdef Py_ssize_t i
    cdef double v
    with nogil:
        for i in range(n):
            v = rms * _gauss(&state)
            if v > 127.0:
                v = 127.0
            elif v < -128.0:
                v = -128.0
            view[i] = <signed char>_round_half_away(v)
    return out


def draw_polyline(buf, int width, xs, ys, int value):
    """Join consecutive (x, y) points with Bresenham segments in-place."""
    cdef unsigned char[::1] view = buf
    cdef Py_ssize_t n = len(xs)
    cdef unsigned char ink = <unsigned char>value
    cdef int x0, y0, x1, y1, dx, dy, sx, sy, err, e2
    cdef Py_ssize_t i
    if n == 1:
        view[<int>ys[0] * width + <int>xs[0]] = ink
        return
    for i in range(n - 1):
        x0 = xs[i]
        y0 = ys[i]
        x1 = xs[i + 1]
        y1 = ys[i + 1]
        dx = x1 - x0 if x1 >= x0 else x0 - x1
        sx = 1 if x0 < x1 else -1
        dy = -(y1 - y0 if y1 >= y0 else y0 - y1)
        sy = 1 if y0 < y1 else -1
        err = dx + dy
        while True:
            view[y0 * width + x0] = ink
            if x0 == x1 and y0 == y1:
                break
            e2 = 2 * err
            if e2 >= dy:
                err += dy
                x0 += sx
            if e2 <= dx:
                err += dx
                y0 += sy


def patch_stats(pixels, int width, int height, int patch):
    """Interleaved (mean/255, population-std/128) per patch, row-major."""
    cdef const unsigned char[::1] px = pixels
    cdef int rows = height // patch
    cdef int cols = width // patch
    out = np.empty(rows * cols * 2, dtype=np.float64)
    cdef double[::1] view = out
    cdef double area = <double>(patch * patch)
    cdef long long s, q
    cdef double mean, var
    cdef int r, c, i, j, base
    cdef Py_ssize_t k = 0
    cdef unsigned char p
    with nogil:
        for r in range(rows):
            for c in range(cols):
                s = 0
                q = 0
                for i in range(patch):
                    base = (r * patch + i) * width + c * patch
                    for j in range(patch):
                        p = px[base + j]
                        s += p
                        q += <long long>p * p
                mean = s / area
                var = q / area - mean * mean
                if var < 0.0:
                    var = 0.0
                view[k] = mean / 255.0
                view[k + 1] = sqrt(var) / 128.0
                k += 2
    return out

"""Deterministic PRNG primitives used across the pipeline.

Everything random in this package bottoms out in SplitMix64 so that
streams are reproducible bit-for-bit regardless of Python/numpy RNG
changes. Gaussians come from Box-Muller over consecutive 53-bit
uniforms (cosine branch only: one Gaussian consumes two uniforms).
Rounding is half-away-from-zero throughout.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_TWO53 = float(1 << 53)
TWO_PI = 6.283185307179586


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance one SplitMix64 step; returns (new_state, output)."""
    state = (state + GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    """Stateful SplitMix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state, out = splitmix64_next(self._state)
        return out

    def next_uniform(self) -> float:
        """53-bit uniform in (0, 1]; never 0, so log() is always finite."""
        return ((self.next_u64() >> 11) + 1) / _TWO53

    def next_gauss(self) -> float:
        """Standard normal via Box-Muller, cosine branch."""
        u1 = self.next_uniform()
        u2 = self.next_uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        return r * math.cos(TWO_PI * u2)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by modulo reduction."""
        return self.next_u64() % n


def channel_seed(seed: int, channel: int) -> int:
    """Independent sub-stream seed for one sEMG channel."""
    return (seed ^ ((channel + 1) * GOLDEN)) & MASK64


def round_half_away(x: float) -> int:
    """round() with halves away from zero, matching the C kernels."""
    if x >= 0.0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


def splitmix64_fill(seed: int, n: int) -> np.ndarray:
    """Vectorized SplitMix64: the first n outputs as uint64.

    Bit-identical to n calls of SplitMix64(seed).next_u64(); used where
    large blocks of draws are needed (backbone projection matrix).
    """
    with np.errstate(over="ignore"):
        idx = np.arange(1, n + 1, dtype=np.uint64)
        z = (np.uint64(seed) + idx * np.uint64(GOLDEN)).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def uniforms_from_u64(words: np.ndarray) -> np.ndarray:
    """Map uint64 words to 53-bit uniforms in [0, 1)."""
    return (words >> np.uint64(11)).astype(np.float64) / _TWO53

"""Sliding-window assembly over the frame stream."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .acquisition import N_CHANNELS, EmgFrame
from .errors import NonMonotonicTimestamp
from .gestures import Gesture

WINDOW_LEN = 40
TRAIN_HOP = 40
LIVE_HOP = 5


@dataclass(frozen=True)
class EmgWindow:
    """8 channels x 40 samples: the unit the classifier consumes."""

    samples: tuple[tuple[int, ...], ...]  # [channel][sample]
    t_start_us: int
    t_end_us: int
    label: Gesture | None = None

    def __post_init__(self):
        if len(self.samples) != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} channel rows")
        for row in self.samples:
            if len(row) != WINDOW_LEN:
                raise ValueError(f"expected {WINDOW_LEN} samples per channel")
        if self.t_end_us <= self.t_start_us:
            raise ValueError("t_end_us must exceed t_start_us")


class WindowBuilder:
    """Emits a window once 40 frames are buffered, then one per hop frames."""

    def __init__(self, hop: int = TRAIN_HOP):
        if hop <= 0:
            raise ValueError("hop must be positive")
        self.hop = hop
        self._buf: deque[EmgFrame] = deque(maxlen=WINDOW_LEN)
        self._count = 0
        self._last_t: int | None = None

    def push_frame(self, frame: EmgFrame,
                   label: Gesture | None = None) -> EmgWindow | None:
        if self._last_t is not None and frame.t_us <= self._last_t:
            raise NonMonotonicTimestamp(
                f"t_us {frame.t_us} not after {self._last_t}")
        self._last_t = frame.t_us
        self._buf.append(frame)
        self._count += 1
        if self._count >= WINDOW_LEN and (self._count - WINDOW_LEN) % self.hop == 0:
            frames = list(self._buf)
            samples = tuple(
                tuple(f.ch[c] for f in frames) for c in range(N_CHANNELS)
            )
            return EmgWindow(
                samples=samples,
                t_start_us=frames[0].t_us,
                t_end_us=frames[-1].t_us,
                label=label,
            )
        return None


def window_rms(window: EmgWindow) -> list[float]:
    """Per-channel RMS: sqrt(mean(v^2))."""
    return [
        math.sqrt(sum(v * v for v in row) / WINDOW_LEN)
        for row in window.samples
    ]


def windows_from_labeled_frames(rows, hop: int = TRAIN_HOP) -> list[EmgWindow]:
    """Windows over a labeled frame sequence.

    A window is labeled only when all 40 frames agree; mixed windows
    (spanning a gesture boundary) are dropped.
    """
    builder = WindowBuilder(hop=hop)
    labels: deque[Gesture | None] = deque(maxlen=WINDOW_LEN)
    out: list[EmgWindow] = []
    for frame, label in rows:
        labels.append(label)
        win = builder.push_frame(frame)
        if win is None:
            continue
        uniform = labels[0]
        if uniform is not None and all(l == uniform for l in labels):
            out.append(EmgWindow(win.samples, win.t_start_us, win.t_end_us,
                                 label=uniform))
    return out

"""Synthetic sEMG sources, scripted streams, and CSV recordings.

Signals are zero-mean Gaussian noise with gesture-specific per-channel
RMS templates, sampled at 200 Hz as signed 8-bit values. Streams are
fully deterministic given (gesture, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import kernels
from .errors import EmptyScript, FormatError, IoFailure
from .gestures import Gesture, parse_gesture
from .rng import SplitMix64, channel_seed

SAMPLE_RATE_HZ = 200
FRAME_SPACING_US = 5000
N_CHANNELS = 8

# Per-channel RMS templates in int8 units; linearly separable in
# windowed RMS so the classifier ceiling sits in the high-90s.
RMS_TEMPLATES: dict[Gesture, tuple[int, ...]] = {
    Gesture.REST: (2, 2, 2, 2, 2, 2, 2, 2),
    Gesture.FIST: (55, 60, 65, 60, 55, 50, 45, 50),
    Gesture.OPEN_HAND: (30, 28, 26, 24, 26, 28, 30, 32),
    Gesture.THUMBS_UP: (8, 10, 70, 75, 70, 12, 8, 8),
}

CSV_HEADER = "t_us,ch0,ch1,ch2,ch3,ch4,ch5,ch6,ch7,label"


@dataclass(frozen=True)
class EmgFrame:
    """One 8-channel sample; values are signed 8-bit, t_us stream-relative."""

    t_us: int
    ch: tuple[int, ...]

    def __post_init__(self):
        if len(self.ch) != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} channels, got {len(self.ch)}")
        for v in self.ch:
            if not -128 <= v <= 127:
                raise ValueError(f"channel value {v} outside [-128, 127]")


@dataclass(frozen=True)
class ScriptStep:
    gesture: Gesture
    duration_ms: int

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise ValueError("duration_ms must be positive")


@dataclass(frozen=True)
class GestureScript:
    steps: tuple[ScriptStep, ...]
    seed: int

    def __post_init__(self):
        if not self.steps:
            raise EmptyScript("script has no steps")

    @staticmethod
    def from_json(text: str) -> "GestureScript":
        try:
            obj = json.loads(text)
            steps = tuple(
                ScriptStep(parse_gesture(s["gesture"]), int(s["duration_ms"]))
                for s in obj["steps"]
            )
            return GestureScript(steps=steps, seed=int(obj["seed"]))
        except EmptyScript:
            raise
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise FormatError(f"bad gesture script: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "steps": [
                {"gesture": s.gesture.value, "duration_ms": s.duration_ms}
                for s in self.steps
            ],
        })


def step_frame_count(duration_ms: int) -> int:
    """Frames in a script step: round(duration_ms * 0.2), halves up."""
    return (duration_ms * 2 + 5) // 10


def synth_stream(gesture: Gesture, seed: int, n_frames: int,
                 t_start_us: int = 0) -> list[EmgFrame]:
    """Deterministic synthetic stream: frame i at t = t_start + 5000*i.

    Channel c draws from an independent SplitMix64 sub-stream; each
    sample is round(clamp(RMS[gesture][c] * N(0,1), -128, 127)).
    """
    if n_frames < 0:
        raise ValueError("n_frames must be >= 0")
    template = RMS_TEMPLATES[gesture]
    channels = [
        kernels.synth_channel(float(template[c]), channel_seed(seed, c), n_frames)
        for c in range(N_CHANNELS)
    ]
    return [
        EmgFrame(
            t_us=t_start_us + FRAME_SPACING_US * i,
            ch=tuple(int(channels[c][i]) for c in range(N_CHANNELS)),
        )
        for i in range(n_frames)
    ]


def script_stream(script: GestureScript) -> list[tuple[EmgFrame, Gesture]]:
    """Concatenated synth segments with continuous timestamps and labels.

    Each step gets its own child seed drawn from SplitMix64(script.seed)
    so repeated gestures do not replay identical noise.
    """
    seeder = SplitMix64(script.seed)
    out: list[tuple[EmgFrame, Gesture]] = []
    t_base = 0
    for step in script.steps:
        n = step_frame_count(step.duration_ms)
        frames = synth_stream(step.gesture, seeder.next_u64(), n, t_start_us=t_base)
        out.extend((f, step.gesture) for f in frames)
        t_base += FRAME_SPACING_US * n
    return out


def iter_script_stream(script: GestureScript) -> Iterator[tuple[EmgFrame, Gesture]]:
    """Pull-based variant of script_stream for streaming consumers."""
    yield from script_stream(script)


def write_recording(path, rows: Iterable[tuple[EmgFrame, Gesture | None]]) -> None:
    """Write frames (+ optional labels) as the canonical CSV recording."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for frame, label in rows:
                name = label.value if label is not None else ""
                fh.write(f"{frame.t_us},{','.join(str(v) for v in frame.ch)},{name}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write recording {path}: {exc}") from exc


def read_recording(path) -> list[tuple[EmgFrame, Gesture | None]]:
    """Read a CSV recording; exact inverse of write_recording."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read recording {path}: {exc}") from exc

    if not lines or lines[0] != CSV_HEADER:
        raise FormatError(f"bad recording header in {path}")
    out: list[tuple[EmgFrame, Gesture | None]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cols = line.split(",")
        if len(cols) != N_CHANNELS + 2:
            raise FormatError(f"{path}:{lineno}: expected {N_CHANNELS + 2} columns, "
                              f"got {len(cols)}")
        try:
            t_us = int(cols[0])
            ch = tuple(int(v) for v in cols[1:9])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: non-integer value") from exc
        for v in ch:
            if not -128 <= v <= 127:
                raise FormatError(f"{path}:{lineno}: channel value {v} out of range")
        try:
            label = parse_gesture(cols[9]) if cols[9] else None
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        out.append((EmgFrame(t_us=t_us, ch=ch), label))
    return out

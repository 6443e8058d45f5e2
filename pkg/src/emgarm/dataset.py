"""Dataset construction: synthetic generation and on-disk PNG layout.

Layout: <root>/<GESTURE>/<index>.png plus manifest.json with per-class
counts and provenance (seed, hop, source description).
"""

from __future__ import annotations

import json
from pathlib import Path

from .acquisition import synth_stream
from .errors import FormatError, IoFailure
from .gestures import GESTURES, Gesture, gesture_index
from .rendering import GraphImage, read_png, render_graph, write_png
from .rng import SplitMix64
from .windowing import WINDOW_LEN, WindowBuilder

MANIFEST_NAME = "manifest.json"


def make_synthetic_dataset(seed: int, windows_per_class: int
                           ) -> list[tuple[GraphImage, int]]:
    """Rendered windows for all four gestures, disjoint hop-40 windows.

    Per-class stream seeds are consecutive draws from SplitMix64(seed),
    taken in canonical class order, so the whole dataset is a pure
    function of (seed, windows_per_class).
    """
    seeder = SplitMix64(seed)
    out: list[tuple[GraphImage, int]] = []
    for label, gesture in enumerate(GESTURES):
        for win in make_synthetic_windows(gesture, seeder.next_u64(),
                                          windows_per_class):
            out.append((render_graph(win), label))
    return out


def make_synthetic_windows(gesture: Gesture, seed: int, n_windows: int):
    """n disjoint windows of one gesture (labeled), for tests and goldens."""
    frames = synth_stream(gesture, seed, n_windows * WINDOW_LEN)
    builder = WindowBuilder(hop=WINDOW_LEN)
    windows = []
    for frame in frames:
        win = builder.push_frame(frame, label=gesture)
        if win is not None:
            windows.append(win)
    return windows


def write_dataset(root, windows, seed: int | None, hop: int,
                  source: str) -> dict:
    """Render labeled windows into the directory layout; returns manifest."""
    root = Path(root)
    counts = {g.value: 0 for g in GESTURES}
    try:
        for g in GESTURES:
            (root / g.value).mkdir(parents=True, exist_ok=True)
        for win in windows:
            if win.label is None:
                continue
            idx = counts[win.label.value]
            write_png(render_graph(win), root / win.label.value / f"{idx}.png")
            counts[win.label.value] += 1
        manifest = {
            "seed": seed,
            "hop": hop,
            "source": source,
            "counts": counts,
        }
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write dataset under {root}: {exc}") from exc
    return manifest


def append_to_dataset(root, windows, source: str, hop: int,
                      seed: int | None = None) -> dict:
    """Add labeled windows to an existing (or new) dataset directory."""
    root = Path(root)
    manifest = read_manifest(root) if (root / MANIFEST_NAME).exists() else {
        "seed": seed, "hop": hop, "source": source,
        "counts": {g.value: 0 for g in GESTURES},
    }
    counts = manifest["counts"]
    try:
        for win in windows:
            if win.label is None:
                continue
            name = win.label.value
            (root / name).mkdir(parents=True, exist_ok=True)
            write_png(render_graph(win), root / name / f"{counts[name]}.png")
            counts[name] += 1
        manifest["source"] = source
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot update dataset under {root}: {exc}") from exc
    return manifest


def read_manifest(root) -> dict:
    path = Path(root) / MANIFEST_NAME
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad manifest {path}: {exc}") from exc
    if "counts" not in obj:
        raise FormatError(f"manifest {path} missing counts")
    return obj


def load_dataset(root) -> list[tuple[GraphImage, int]]:
    """Read all PNGs under the class directories, ordered by class then index."""
    root = Path(root)
    if not root.is_dir():
        raise IoFailure(f"dataset directory {root} does not exist")
    out: list[tuple[GraphImage, int]] = []
    for gesture in GESTURES:
        class_dir = root / gesture.value
        if not class_dir.is_dir():
            continue
        paths = sorted(class_dir.glob("*.png"), key=lambda p: int(p.stem))
        label = gesture_index(gesture)
        for path in paths:
            out.append((read_png(path), label))
    return out


def dataset_counts(root) -> dict[str, int]:
    root = Path(root)
    counts = {}
    for gesture in GESTURES:
        class_dir = root / gesture.value
        counts[gesture.value] = (
            len(list(class_dir.glob("*.png"))) if class_dir.is_dir() else 0)
    return counts

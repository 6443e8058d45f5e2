"""The four gesture classes and their canonical wire names."""

from __future__ import annotations

import enum


class Gesture(enum.Enum):
    FIST = "FIST"
    THUMBS_UP = "THUMBS_UP"
    OPEN_HAND = "OPEN_HAND"
    REST = "REST"

    def __str__(self) -> str:
        return self.value


# Canonical class order used everywhere a gesture becomes an index
# (classifier labels, pose tables, wire validation).
GESTURES: tuple[Gesture, ...] = (
    Gesture.FIST,
    Gesture.THUMBS_UP,
    Gesture.OPEN_HAND,
    Gesture.REST,
)

GESTURE_NAMES: tuple[str, ...] = tuple(g.value for g in GESTURES)

_BY_NAME = {g.value: g for g in GESTURES}


def parse_gesture(name: str) -> Gesture:
    """Map a canonical wire name back to its Gesture.

    Raises ValueError for anything outside the closed 4-name set.
    """
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown gesture name: {name!r}") from None


def gesture_index(g: Gesture) -> int:
    return GESTURES.index(g)

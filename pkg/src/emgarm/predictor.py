"""Load-once streaming inference with debounced gesture events.

The model file is read exactly once per Predictor lifetime (the load
counter is observable); every window then flows render -> features ->
softmax without touching disk. Events fire only after k consecutive
confident agreeing classifications, with a refractory rule so an
unchanged gesture cannot re-fire until another gesture intervenes or
the idle timeout passes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import BackboneSpec, SoftmaxHead, extract_features, load_model, predict_probs
from .gestures import Gesture, parse_gesture
from .rendering import render_graph
from .windowing import EmgWindow


@dataclass(frozen=True)
class PredictorConfig:
    confidence_threshold: float = 0.70
    consecutive_required: int = 3
    idle_timeout_ms: int = 2000

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in (0, 1]")
        if self.consecutive_required < 1:
            raise ValueError("consecutive_required must be >= 1")
        if self.idle_timeout_ms <= 0:
            raise ValueError("idle_timeout_ms must be positive")


@dataclass(frozen=True)
class GestureEvent:
    gesture: Gesture
    confidence: float
    t_us: int

    def to_json_payload(self) -> dict:
        return {"type": "gesture", "gesture": self.gesture.value,
                "confidence": self.confidence, "t_us": self.t_us}


@dataclass(frozen=True)
class Classification:
    gesture: Gesture
    confidence: float
    probs: np.ndarray
    t_us: int


class Debouncer:
    """Run-length gate over a classification stream.

    State is exactly: the current agreeing run, the last emitted gesture,
    and the last classification time (for idle re-arm).
    """

    def __init__(self, config: PredictorConfig):
        self.config = config
        self._run_gesture: Gesture | None = None
        self._run_length = 0
        self._last_emitted: Gesture | None = None
        self._last_seen_t_us: int | None = None

    def update(self, c: Classification) -> GestureEvent | None:
        # a quiet stream invalidates both the run and the refractory state
        if (self._last_seen_t_us is not None
                and c.t_us - self._last_seen_t_us
                >= self.config.idle_timeout_ms * 1000):
            self._run_gesture = None
            self._run_length = 0
            self._last_emitted = None
        self._last_seen_t_us = c.t_us

        if c.confidence < self.config.confidence_threshold:
            self._run_gesture = None
            self._run_length = 0
            return None
        if c.gesture == self._run_gesture:
            self._run_length += 1
        else:
            self._run_gesture = c.gesture
            self._run_length = 1
        if self._run_length < self.config.consecutive_required:
            return None
        # refractory: an unchanged gesture stays suppressed until another
        # gesture's event intervenes (or the stream goes idle, above)
        if c.gesture == self._last_emitted:
            return None
        self._last_emitted = c.gesture
        return GestureEvent(gesture=c.gesture, confidence=c.confidence,
                            t_us=c.t_us)


class Predictor:
    """One instance per stream; model loaded once at construction."""

    def __init__(self, model_path, config: PredictorConfig | None = None):
        self.config = config or PredictorConfig()
        self.load_count = 0
        self._head, self._backbone = self._load(model_path)
        self._classes = [parse_gesture(name) for name in self._head.classes]
        self._debouncer = Debouncer(self.config)

    def _load(self, model_path) -> tuple[SoftmaxHead, BackboneSpec]:
        head, backbone = load_model(model_path)
        self.load_count += 1
        return head, backbone

    def classify(self, window: EmgWindow) -> Classification:
        image = render_graph(window)
        features = extract_features(image, self._backbone)
        probs = predict_probs(self._head, features)
        idx = int(np.argmax(probs))
        return Classification(
            gesture=self._classes[idx],
            confidence=float(probs[idx]),
            probs=probs,
            t_us=window.t_end_us,
        )

    def debounce(self, c: Classification) -> GestureEvent | None:
        return self._debouncer.update(c)

    def process(self, window: EmgWindow
                ) -> tuple[Classification, GestureEvent | None]:
        c = self.classify(window)
        return c, self.debounce(c)

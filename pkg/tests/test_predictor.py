"""Load-once predictor and debounce behavior."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emgarm.classifier import BackboneSpec, SoftmaxHead, save_model
from emgarm.dataset import make_synthetic_windows
from emgarm.errors import IoFailure
from emgarm.gestures import GESTURES, Gesture
from emgarm.predictor import (Classification, Debouncer, Predictor,
                              PredictorConfig)


@pytest.fixture(scope="module")
def model_file(tmp_path_factory):
    """A lightweight head is enough for debounce/load-count behavior."""
    rng = np.random.default_rng(11)
    head = SoftmaxHead(W=rng.normal(0, 0.5, (4, 2048)), b=np.zeros(4))
    path = tmp_path_factory.mktemp("pred") / "head.emgm"
    save_model(head, BackboneSpec(), path)
    return path


def _classification(gesture, confidence, t_us):
    return Classification(gesture=gesture, confidence=confidence,
                          probs=np.full(4, 0.25), t_us=t_us)


def test_load_once_across_many_predictions(model_file):
    predictor = Predictor(model_file)
    window = make_synthetic_windows(Gesture.FIST, 3, 1)[0]
    for _ in range(1000):
        predictor.classify(window)
    assert predictor.load_count == 1


def test_predictors_are_isolated(model_file):
    a = Predictor(model_file)
    b = Predictor(model_file)
    assert a.load_count == 1
    assert b.load_count == 1


def test_missing_model_file(tmp_path):
    with pytest.raises(IoFailure):
        Predictor(tmp_path / "missing.emgm")


def test_classify_is_pure_and_probs_sum(model_file):
    predictor = Predictor(model_file)
    window = make_synthetic_windows(Gesture.OPEN_HAND, 8, 1)[0]
    a = predictor.classify(window)
    b = predictor.classify(window)
    assert a.gesture == b.gesture
    assert np.array_equal(a.probs, b.probs)
    assert abs(float(np.sum(a.probs)) - 1.0) < 1e-9


def test_debounce_emits_on_kth_agreement(model_file):
    predictor = Predictor(model_file, PredictorConfig(consecutive_required=3))
    t = [25000 * i for i in range(10)]
    assert predictor.debounce(_classification(Gesture.FIST, 0.9, t[0])) is None
    assert predictor.debounce(_classification(Gesture.FIST, 0.9, t[1])) is None
    event = predictor.debounce(_classification(Gesture.FIST, 0.9, t[2]))
    assert event is not None
    assert event.gesture is Gesture.FIST
    assert event.t_us == t[2]


def test_debounce_alternating_never_fires(model_file):
    predictor = Predictor(model_file, PredictorConfig(consecutive_required=3))
    for i in range(20):
        g = Gesture.FIST if i % 2 == 0 else Gesture.OPEN_HAND
        assert predictor.debounce(_classification(g, 0.9, 25000 * i)) is None


def test_debounce_refractory_suppresses_repeats(model_file):
    predictor = Predictor(model_file, PredictorConfig(consecutive_required=3))
    events = [predictor.debounce(_classification(Gesture.FIST, 0.9, 25000 * i))
              for i in range(10)]
    assert sum(e is not None for e in events) == 1


def test_debounce_rearms_after_other_gesture(model_file):
    predictor = Predictor(model_file, PredictorConfig(consecutive_required=2))
    seq = [Gesture.FIST] * 2 + [Gesture.REST] * 2 + [Gesture.FIST] * 2
    events = [predictor.debounce(_classification(g, 0.9, 25000 * i))
              for i, g in enumerate(seq)]
    fired = [e.gesture for e in events if e is not None]
    assert fired == [Gesture.FIST, Gesture.REST, Gesture.FIST]


def test_debounce_rearms_after_idle_gap(model_file):
    predictor = Predictor(model_file, PredictorConfig(
        consecutive_required=2, idle_timeout_ms=2000))
    t = 0
    events = []
    for _ in range(4):
        events.append(predictor.debounce(
            _classification(Gesture.FIST, 0.9, t)))
        t += 25000
    # stream goes quiet for 3 s, then the same gesture returns
    t += 3_000_000
    for _ in range(2):
        events.append(predictor.debounce(
            _classification(Gesture.FIST, 0.9, t)))
        t += 25000
    assert sum(e is not None for e in events) == 2


def test_below_threshold_resets_run(model_file):
    predictor = Predictor(model_file, PredictorConfig(
        confidence_threshold=0.7, consecutive_required=3))
    pattern = [0.9, 0.9, 0.5, 0.9, 0.9, 0.9]
    events = [predictor.debounce(_classification(Gesture.FIST, c, 25000 * i))
              for i, c in enumerate(pattern)]
    assert [e is not None for e in events] == [False] * 5 + [True]


@given(st.lists(st.tuples(st.sampled_from(GESTURES),
                          st.floats(0.0, 1.0)),
                min_size=1, max_size=200))
@settings(max_examples=50, deadline=None)
def test_no_event_below_threshold_and_rate_bound(seq):
    debouncer = Debouncer(PredictorConfig(confidence_threshold=0.7,
                                          consecutive_required=3))
    events = []
    for i, (g, conf) in enumerate(seq):
        e = debouncer.update(_classification(g, conf, 25000 * i))
        if e is not None:
            events.append(e)
    assert all(e.confidence >= 0.7 for e in events)
    assert len(events) <= len(seq) / 3

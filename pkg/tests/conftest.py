"""Shared fixtures: the fixed synthetic dataset and trained models.

Training at the acceptance budgets is the expensive part of the suite,
so it runs once per session and is shared by module and acceptance
tests alike.
"""

import time

import numpy as np
import pytest

from emgarm import classifier
from emgarm.dataset import make_synthetic_dataset

DATASET_SEED = 42
WINDOWS_PER_CLASS = 200
BUDGETS = (400, 2500, 10000, 30000)

# wall-clock bookkeeping for the acceptance runtime budget
TIMINGS: dict[str, float] = {}


@pytest.fixture(scope="session")
def synthetic_features():
    """Features and labels for the fixed 800-image synthetic dataset."""
    t0 = time.perf_counter()
    ds = make_synthetic_dataset(seed=DATASET_SEED,
                                windows_per_class=WINDOWS_PER_CLASS)
    backbone = classifier.BackboneSpec()
    features = classifier.featurize([im for im, _ in ds], backbone)
    labels = np.array([y for _, y in ds], dtype=np.int64)
    TIMINGS["dataset_and_features"] = time.perf_counter() - t0
    return features, labels, backbone


@pytest.fixture(scope="session")
def budget_runs(synthetic_features):
    """Independent training runs at each acceptance step budget."""
    features, labels, _ = synthetic_features
    runs = {}
    t0 = time.perf_counter()
    for steps in BUDGETS:
        config = classifier.TrainConfig(steps=steps, batch_size=100,
                                        learning_rate=0.01, seed=DATASET_SEED)
        runs[steps] = classifier.train_on_features(features, labels, config)
    TIMINGS["budget_training"] = time.perf_counter() - t0
    return runs


@pytest.fixture(scope="session")
def trained_model_path(budget_runs, synthetic_features, tmp_path_factory):
    """The 30000-step model saved to disk (criteria 6-8 consume the file)."""
    _, _, backbone = synthetic_features
    head, _report = budget_runs[30000]
    path = tmp_path_factory.mktemp("model") / "acceptance.emgm"
    classifier.save_model(head, backbone, path)
    return path

"""Frozen feature backbone plus a retrainable softmax final layer.

The backbone is a deterministic stand-in for a pretrained CNN's
bottleneck: per-patch image statistics pushed through a frozen random
projection with tanh squashing. Only the 4-way softmax head on top is
ever trained (mini-batch SGD on cross-entropy), which is the whole
transfer-learning point: cheap retraining over fixed features.
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (DimensionMismatch, DivergedLoss, EmptyBatch, EmptySplit,
                     FormatError, InsufficientData, IoFailure, NonFiniteInput)
from .gestures import GESTURE_NAMES
from .rng import SplitMix64, splitmix64_fill, uniforms_from_u64
from .rendering import GraphImage

PATCH = 16
STATS_DIM = 512
FEATURE_DIM = 2048
N_CLASSES = 4
DEFAULT_BACKBONE_SEED = 1
IMAGE_SIDE = 256
IMAGE_PIXELS = IMAGE_SIDE * IMAGE_SIDE

MODEL_MAGIC = b"EMGM"
MODEL_VERSION = 1


@dataclass(frozen=True)
class BackboneSpec:
    """Frozen featurizer: fully determined by its seed, never trained."""

    seed: int = DEFAULT_BACKBONE_SEED

    def projection(self) -> np.ndarray:
        """The 2048x512 projection, entries uniform in +/- 1/sqrt(512),
        drawn row-major from SplitMix64(seed)."""
        return _projection_cached(self.seed)


_PROJECTION_CACHE: dict[int, np.ndarray] = {}


def _projection_cached(seed: int) -> np.ndarray:
    mat = _PROJECTION_CACHE.get(seed)
    if mat is None:
        u = uniforms_from_u64(splitmix64_fill(seed, FEATURE_DIM * STATS_DIM))
        scale = 1.0 / math.sqrt(STATS_DIM)
        mat = ((2.0 * u - 1.0) * scale).reshape(FEATURE_DIM, STATS_DIM)
        mat.setflags(write=False)
        _PROJECTION_CACHE[seed] = mat
    return mat


def extract_features(image: GraphImage, backbone: BackboneSpec) -> np.ndarray:
    """tanh(A @ s) where s holds per-patch (mean/255, std/128) stats."""
    if image.width * image.height != IMAGE_PIXELS:
        raise DimensionMismatch(
            f"expected {IMAGE_SIDE}x{IMAGE_SIDE} image, got "
            f"{image.width}x{image.height}")
    stats = kernels.patch_stats(image.pixels, image.width, image.height, PATCH)
    return np.tanh(backbone.projection() @ stats)


@dataclass
class SoftmaxHead:
    """The trainable final layer: logits = W @ f + b."""

    W: np.ndarray
    b: np.ndarray
    classes: tuple[str, ...] = GESTURE_NAMES

    @staticmethod
    def zeros() -> "SoftmaxHead":
        return SoftmaxHead(W=np.zeros((N_CLASSES, FEATURE_DIM)),
                           b=np.zeros(N_CLASSES))


def predict_probs(head: SoftmaxHead, features: np.ndarray) -> np.ndarray:
    """Softmax over head logits, max-subtracted for stability."""
    if features.shape != (FEATURE_DIM,):
        raise DimensionMismatch(f"feature vector has shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise NonFiniteInput("non-finite feature values")
    logits = head.W @ features + head.b
    if not np.all(np.isfinite(logits)):
        raise NonFiniteInput("non-finite logits")
    return _softmax_rows(logits[None, :])[0]


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def batch_loss_and_grad(head: SoftmaxHead, features: np.ndarray,
                        labels: np.ndarray):
    """Mean cross-entropy over the batch and its exact analytic gradients.

    Per example, dlogits = p - onehot(label); gradients are means of the
    per-example contributions.
    """
    n = features.shape[0]
    if n == 0:
        raise EmptyBatch("empty batch")
    probs = _softmax_rows(features @ head.W.T + head.b)
    loss = float(np.mean(-np.log(probs[np.arange(n), labels])))
    dlogits = probs
    dlogits[np.arange(n), labels] -= 1.0
    grad_w = dlogits.T @ features / n
    grad_b = dlogits.mean(axis=0)
    return loss, grad_w, grad_b


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 4000
    batch_size: int = 100
    learning_rate: float = 0.01
    seed: int = 0
    eval_every: int = 100

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.batch_size <= 0 or self.learning_rate <= 0 or self.eval_every <= 0:
            raise ValueError("batch_size, learning_rate, eval_every must be positive")


@dataclass
class TrainReport:
    """Evaluation trace plus final held-out test metrics."""

    series: list[tuple[int, float, float, float]] = field(default_factory=list)
    final_test_accuracy: float = 0.0
    final_test_cross_entropy: float = 0.0
    wall_time_s: float = 0.0

    def to_csv(self) -> str:
        lines = ["step,train_acc,val_acc,val_xent"]
        for step, tr, va, xe in self.series:
            lines.append(f"{step},{tr:.6f},{va:.6f},{xe:.6f}")
        return "\n".join(lines) + "\n"


def featurize(images, backbone: BackboneSpec) -> np.ndarray:
    """Stack per-image feature vectors (one matvec per image, fixed order)."""
    return np.stack([extract_features(im, backbone) for im in images])


def split_indices(n: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic 80/10/10 split via a Fisher-Yates shuffle on seed."""
    order = list(range(n))
    rng = SplitMix64(seed)
    for i in range(n - 1, 0, -1):
        j = rng.next_below(i + 1)
        order[i], order[j] = order[j], order[i]
    n_train = (n * 8) // 10
    n_val = n // 10
    order = np.array(order)
    return (order[:n_train], order[n_train:n_train + n_val],
            order[n_train + n_val:])


def train_on_features(features: np.ndarray, labels: np.ndarray,
                      config: TrainConfig, progress=None):
    """SGD from a zero head over a deterministic 80/10/10 split.

    progress, when given, is called with each (step, train_acc, val_acc,
    val_xent) evaluation row as it is recorded.
    """
    n = features.shape[0]
    present = np.unique(labels)
    if len(present) < N_CLASSES:
        raise InsufficientData(
            f"need examples for all {N_CLASSES} classes, got {len(present)}")
    idx_train, idx_val, idx_test = split_indices(n, config.seed)
    if config.batch_size > len(idx_train):
        raise InsufficientData("batch_size exceeds training split")

    f_train, y_train = features[idx_train], labels[idx_train]
    f_val, y_val = features[idx_val], labels[idx_val]
    f_test, y_test = features[idx_test], labels[idx_test]

    head = SoftmaxHead.zeros()
    report = TrainReport()
    sampler = SplitMix64(config.seed)
    t0 = time.perf_counter()
    for step in range(1, config.steps + 1):
        batch_idx = np.array([sampler.next_below(len(idx_train))
                              for _ in range(config.batch_size)])
        loss, grad_w, grad_b = batch_loss_and_grad(
            head, f_train[batch_idx], y_train[batch_idx])
        if not math.isfinite(loss):
            raise DivergedLoss(f"non-finite loss at step {step}")
        head.W -= config.learning_rate * grad_w
        head.b -= config.learning_rate * grad_b
        if step % config.eval_every == 0:
            tr_acc, _ = evaluate_features(head, f_train, y_train)
            va_acc, va_xe = evaluate_features(head, f_val, y_val)
            report.series.append((step, tr_acc, va_acc, va_xe))
            if progress is not None:
                progress(step, tr_acc, va_acc, va_xe)
    if not (np.all(np.isfinite(head.W)) and np.all(np.isfinite(head.b))):
        raise DivergedLoss("non-finite weights after training")
    acc, xent = evaluate_features(head, f_test, y_test)
    report.final_test_accuracy = acc
    report.final_test_cross_entropy = xent
    report.wall_time_s = time.perf_counter() - t0
    return head, report


def train(dataset, backbone: BackboneSpec, config: TrainConfig):
    """dataset: sequence of (GraphImage, class index)."""
    if not dataset:
        raise InsufficientData("empty dataset")
    images = [im for im, _ in dataset]
    labels = np.array([y for _, y in dataset], dtype=np.int64)
    return train_on_features(featurize(images, backbone), labels, config)


def evaluate_features(head: SoftmaxHead, features: np.ndarray,
                      labels: np.ndarray) -> tuple[float, float]:
    """(accuracy, mean cross-entropy); argmax ties go to the lowest index."""
    n = features.shape[0]
    if n == 0:
        raise EmptySplit("empty evaluation split")
    probs = _softmax_rows(features @ head.W.T + head.b)
    pred = probs.argmax(axis=1)  # np.argmax takes the first (lowest) on ties
    accuracy = float(np.mean(pred == labels))
    xent = float(np.mean(-np.log(probs[np.arange(n), labels])))
    return accuracy, xent


def evaluate(head: SoftmaxHead, backbone: BackboneSpec, dataset):
    if not dataset:
        raise EmptySplit("empty evaluation split")
    images = [im for im, _ in dataset]
    labels = np.array([y for _, y in dataset], dtype=np.int64)
    return evaluate_features(head, featurize(images, backbone), labels)


def save_model(head: SoftmaxHead, backbone: BackboneSpec, path) -> None:
    """Binary model file; weights are f64 little-endian, load is bit-exact."""
    blob = bytearray()
    blob += MODEL_MAGIC
    blob += struct.pack("<I", MODEL_VERSION)
    blob += struct.pack("<III", N_CLASSES, FEATURE_DIM, STATS_DIM)
    blob += struct.pack("<Q", backbone.seed)
    for name in head.classes:
        raw = name.encode("utf-8")
        blob += struct.pack("<I", len(raw)) + raw
    blob += np.ascontiguousarray(head.b, dtype="<f8").tobytes()
    blob += np.ascontiguousarray(head.W, dtype="<f8").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(bytes(blob))
    except OSError as exc:
        raise IoFailure(f"cannot write model {path}: {exc}") from exc


def load_model(path) -> tuple[SoftmaxHead, BackboneSpec]:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read model {path}: {exc}") from exc

    view = memoryview(data)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise FormatError("truncated model file")
        chunk = view[pos:pos + n]
        pos += n
        return chunk

    if bytes(take(4)) != MODEL_MAGIC:
        raise FormatError("bad model magic")
    (version,) = struct.unpack("<I", take(4))
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}")
    n_classes, feature_dim, stats_dim = struct.unpack("<III", take(12))
    if (n_classes, feature_dim, stats_dim) != (N_CLASSES, FEATURE_DIM, STATS_DIM):
        raise FormatError(
            f"unsupported dims ({n_classes}, {feature_dim}, {stats_dim})")
    (seed,) = struct.unpack("<Q", take(8))
    classes = []
    for _ in range(n_classes):
        (length,) = struct.unpack("<I", take(4))
        classes.append(bytes(take(length)).decode("utf-8"))
    b = np.frombuffer(take(8 * n_classes), dtype="<f8").astype(np.float64)
    w = np.frombuffer(take(8 * n_classes * feature_dim),
                      dtype="<f8").astype(np.float64).reshape(n_classes,
                                                              feature_dim)
    if pos != len(view):
        raise FormatError("trailing bytes in model file")
    head = SoftmaxHead(W=w, b=b, classes=tuple(classes))
    return head, BackboneSpec(seed=seed)

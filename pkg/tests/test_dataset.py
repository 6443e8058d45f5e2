"""Dataset directory layout, manifest bookkeeping, rebuild determinism."""

import hashlib

import pytest

from emgarm.dataset import (append_to_dataset, dataset_counts, load_dataset,
                            make_synthetic_dataset, make_synthetic_windows,
                            read_manifest, write_dataset)
from emgarm.errors import FormatError, IoFailure
from emgarm.gestures import Gesture


def _small_windows():
    wins = []
    for g in (Gesture.FIST, Gesture.REST):
        wins.extend(make_synthetic_windows(g, 5, 3))
    return wins


def test_write_then_load_preserves_counts(tmp_path):
    manifest = write_dataset(tmp_path / "ds", _small_windows(), seed=5,
                             hop=40, source="test")
    assert manifest["counts"] == {"FIST": 3, "THUMBS_UP": 0,
                                  "OPEN_HAND": 0, "REST": 3}
    images = load_dataset(tmp_path / "ds")
    assert len(images) == 6
    assert sum(manifest["counts"].values()) == len(images)


def test_rebuild_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        write_dataset(tmp_path / name, _small_windows(), seed=5, hop=40,
                      source="test")
    digests = []
    for name in ("a", "b"):
        parts = []
        for path in sorted((tmp_path / name).rglob("*.png")):
            parts.append(hashlib.sha256(path.read_bytes()).hexdigest())
        digests.append(parts)
    assert digests[0] == digests[1]
    assert len(digests[0]) == 6


def test_append_extends_counts(tmp_path):
    root = tmp_path / "ds"
    write_dataset(root, _small_windows(), seed=5, hop=40, source="initial")
    more = make_synthetic_windows(Gesture.FIST, 9, 2)
    manifest = append_to_dataset(root, more, source="extra", hop=40)
    assert manifest["counts"]["FIST"] == 5
    assert dataset_counts(root)["FIST"] == 5
    assert len(load_dataset(root)) == 8


def test_synthetic_dataset_shape_and_balance():
    ds = make_synthetic_dataset(seed=42, windows_per_class=5)
    assert len(ds) == 20
    labels = [y for _, y in ds]
    assert all(labels.count(k) == 5 for k in range(4))


def test_unlabeled_windows_are_skipped(tmp_path):
    wins = make_synthetic_windows(Gesture.FIST, 5, 2)
    from emgarm.windowing import EmgWindow
    unlabeled = EmgWindow(wins[0].samples, wins[0].t_start_us,
                          wins[0].t_end_us, label=None)
    manifest = write_dataset(tmp_path / "ds", wins + [unlabeled], seed=5,
                             hop=40, source="test")
    assert manifest["counts"]["FIST"] == 2


def test_missing_dataset_dir_raises(tmp_path):
    with pytest.raises(IoFailure):
        load_dataset(tmp_path / "nope")


def test_bad_manifest_rejected(tmp_path):
    root = tmp_path / "ds"
    root.mkdir()
    (root / "manifest.json").write_text("{not json", encoding="utf-8")
    with pytest.raises(FormatError):
        read_manifest(root)

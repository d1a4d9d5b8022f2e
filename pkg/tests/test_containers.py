import numpy as np
import pytest

import vadkit as vk
from vadkit.containers import FeatureKind, video_boundaries
from vadkit.containers import validate_dataset
from vadkit.errors import (
    DimensionMismatch,
    LabelLengthMismatch,
    MagicMismatch,
    MissingFile,
    UnsortedRecords,
    ValidationError,
)


def make_minimal_dataset():
    rec = [vk.FeatureRecord(i, np.array([float(i), -1.0], dtype=np.float32))
           for i in range(10)]
    video = vk.VideoFeatureSet("v0", 10, {FeatureKind.VELOCITY: rec})
    return vk.Dataset("mini", train=[video],
                      dims={FeatureKind.VELOCITY: 2})


def test_load_minimal_roundtrip(tmp_path):
    ds = make_minimal_dataset()
    vk.save_dataset(ds, tmp_path / "d")
    loaded = vk.load_dataset(tmp_path / "d")
    assert loaded.dims[FeatureKind.VELOCITY] == 2
    assert len(loaded.train) == 1 and len(loaded.test) == 0
    assert loaded.train[0].frame_count == 10


def test_velocity_dimension_mismatch(tmp_path):
    ds = make_minimal_dataset()
    bad = vk.FeatureRecord(0, np.zeros(3, dtype=np.float32))
    ds.train[0].records[FeatureKind.VELOCITY][0] = bad
    with pytest.raises(DimensionMismatch):
        validate_dataset(ds)


def test_synth_roundtrip_bit_exact(tmp_path, tiny_dataset):
    vk.save_dataset(tiny_dataset, tmp_path / "d")
    loaded = vk.load_dataset(tmp_path / "d")
    assert loaded.name == tiny_dataset.name
    assert loaded.dims == tiny_dataset.dims
    for orig, back in zip(tiny_dataset.train + tiny_dataset.test,
                          loaded.train + loaded.test):
        assert orig.video_id == back.video_id
        assert orig.frame_count == back.frame_count
        for kind in orig.records:
            a, b = orig.records[kind], back.records[kind]
            assert len(a) == len(b)
            for ra, rb in zip(a, b):
                assert ra.frame_index == rb.frame_index
                assert ra.block_length == rb.block_length
                assert ra.object_id == rb.object_id
                assert ra.vector.tobytes() == rb.vector.tobytes()
        if orig.ground_truth is None:
            assert back.ground_truth is None
        else:
            assert np.array_equal(orig.ground_truth, back.ground_truth)


def test_save_empty_test_split(tmp_path):
    ds = make_minimal_dataset()
    vk.save_dataset(ds, tmp_path / "d")
    assert vk.load_dataset(tmp_path / "d").test == []


def test_save_to_unwritable_location(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.touch()  # a file where a directory is required
    ds = make_minimal_dataset()
    with pytest.raises(OSError):
        vk.save_dataset(ds, blocker / "sub")


def test_missing_file(tmp_path):
    ds = make_minimal_dataset()
    vk.save_dataset(ds, tmp_path / "d")
    (tmp_path / "d" / "train" / "v0.velocity.mff").unlink()
    with pytest.raises(MissingFile):
        vk.load_dataset(tmp_path / "d")


def test_magic_mismatch(tmp_path):
    ds = make_minimal_dataset()
    vk.save_dataset(ds, tmp_path / "d")
    path = tmp_path / "d" / "train" / "v0.velocity.mff"
    data = bytearray(path.read_bytes())
    data[:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(MagicMismatch):
        vk.load_dataset(tmp_path / "d")


def test_unsorted_records_rejected():
    ds = make_minimal_dataset()
    recs = ds.train[0].records[FeatureKind.VELOCITY]
    recs[0], recs[1] = recs[1], recs[0]
    with pytest.raises(UnsortedRecords):
        validate_dataset(ds)


def test_label_length_mismatch():
    ds = make_minimal_dataset()
    ds.train[0].ground_truth = np.zeros(7, dtype=np.uint8)
    with pytest.raises(LabelLengthMismatch):
        validate_dataset(ds)


def test_train_positive_labels_rejected():
    ds = make_minimal_dataset()
    ds.train[0].ground_truth = np.ones(10, dtype=np.uint8)
    with pytest.raises(ValidationError):
        validate_dataset(ds)


def test_record_past_frame_count_rejected():
    ds = make_minimal_dataset()
    ds.train[0].records[FeatureKind.VELOCITY].append(
        vk.FeatureRecord(10, np.zeros(2, dtype=np.float32)))
    with pytest.raises(ValidationError):
        validate_dataset(ds)


def test_nonfinite_vector_rejected():
    ds = make_minimal_dataset()
    ds.train[0].records[FeatureKind.VELOCITY][3].vector[0] = np.nan
    with pytest.raises(ValidationError):
        validate_dataset(ds)


def test_frames_of_ordering():
    v1 = vk.VideoFeatureSet("v1", 3, {}, ground_truth=np.zeros(3))
    v2 = vk.VideoFeatureSet("v2", 2, {}, ground_truth=np.zeros(2))
    ds = vk.Dataset("d", test=[v1, v2])
    assert vk.frames_of(ds, "test") == [("v1", 0), ("v1", 1), ("v1", 2),
                                        ("v2", 0), ("v2", 1)]
    assert vk.frames_of(ds, "train") == []
    assert vk.frames_of(ds, "test") == vk.frames_of(ds, "test")
    assert video_boundaries(ds, "test") == [(0, 3), (3, 5)]

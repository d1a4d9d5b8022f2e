import numpy as np
import pytest

from mffextract import ModelLoadError
from mffextract.models import (
    DETECTORS,
    BlockPoolEncoder,
    GrayPoolEncoder,
    IntensityDetector,
    MedianBackgroundDetector,
    SilhouetteLandmarks,
    load_model,
)
from mffextract.tracker import IouTracker, iou


def test_unknown_model_identifier():
    with pytest.raises(ModelLoadError, match="available"):
        load_model(DETECTORS, "yolo-v9000", "detector")


def test_intensity_detector_finds_bright_square():
    frame = np.zeros((32, 32), dtype=np.float32)
    frame[5:15, 8:18] = 200.0
    det = IntensityDetector()
    det.fit(frame[None])
    boxes = det.detect(frame)
    assert len(boxes) == 1
    x, y, w, h = boxes[0]
    assert (x, y) == (8, 5) and 8 <= w <= 12 and 8 <= h <= 12


def test_median_detector_ignores_static_background():
    clip = np.zeros((9, 32, 32), dtype=np.float32)
    clip[:, 2:10, 2:10] = 120.0          # in every frame => background
    clip[4, 20:28, 20:28] = 200.0        # transient foreground
    det = MedianBackgroundDetector()
    det.fit(clip)
    assert det.detect(clip[0]) == []
    boxes = det.detect(clip[4])
    assert len(boxes) == 1 and boxes[0][:2] == (20, 20)


def test_silhouette_landmarks_shape_and_range():
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[4:16, 6:14] = 1
    pose = SilhouetteLandmarks(17)
    vec = pose(mask)
    assert vec.shape == (34,)
    assert np.all(np.isfinite(vec))
    assert vec.min() >= 0.0 and vec.max() <= 1.0


def test_silhouette_landmarks_empty_mask():
    vec = SilhouetteLandmarks(17)(np.zeros((10, 10), dtype=np.uint8))
    assert vec.shape == (34,) and np.all(vec == 0.0)


def test_gray_pool_encoder():
    enc = GrayPoolEncoder(8)
    vec = enc(np.full((30, 17), 255.0, dtype=np.float32))
    assert vec.shape == (64,)
    assert np.allclose(vec, 1.0)


def test_block_pool_encoder_constant_block():
    enc = BlockPoolEncoder(4)
    block = np.full((16, 24, 24), 127.5, dtype=np.float32)
    vec = enc(block)
    assert vec.shape == (32,)
    assert np.allclose(vec[:16], 0.5)   # temporal means
    assert np.allclose(vec[16:], 0.0)   # temporal stds


def test_iou_symmetric_and_bounded():
    a, b = (0, 0, 10, 10), (5, 5, 10, 10)
    assert iou(a, b) == iou(b, a)
    assert 0.0 < iou(a, b) < 1.0
    assert iou(a, a) == 1.0
    assert iou(a, (50, 50, 4, 4)) == 0.0


def test_tracker_keeps_ids_across_overlap():
    tracker = IouTracker()
    first = tracker.update([(0, 0, 10, 10), (30, 30, 10, 10)])
    second = tracker.update([(1, 0, 10, 10), (31, 30, 10, 10)])
    assert [oid for oid, _ in first] == [0, 1]
    assert [oid for oid, _ in second] == [0, 1]


def test_tracker_new_id_for_disjoint_box():
    tracker = IouTracker()
    tracker.update([(0, 0, 10, 10)])
    result = tracker.update([(100, 100, 10, 10)])
    assert result[0][0] == 1

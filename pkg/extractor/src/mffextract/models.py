"""Lightweight deterministic feature models, selected by identifier.

Each model family is a registry keyed by the identifier carried in the
extraction config, so alternative implementations (including heavyweight
pretrained ones) can be dropped in without touching the pipeline. All
built-ins are classical CPU models with no weight files.
"""

from __future__ import annotations

import cv2
import numpy as np

from .errors import ModelLoadError


# --- object detection (per frame, returns [(x, y, w, h), ...]) ---

class MedianBackgroundDetector:
    """Foreground boxes from |frame - median background| thresholding."""

    def __init__(self, threshold: float = 25.0, min_area: int = 16):
        self.threshold = threshold
        self.min_area = min_area
        self.background = None

    def fit(self, clip: np.ndarray) -> None:
        self.background = np.median(clip, axis=0)

    def mask(self, frame: np.ndarray) -> np.ndarray:
        diff = np.abs(frame - self.background) > self.threshold
        mask = diff.astype(np.uint8)
        kernel = np.ones((3, 3), np.uint8)
        return cv2.morphologyEx(mask, cv2.MORPH_OPEN, kernel)

    def detect(self, frame: np.ndarray) -> list:
        contours, _ = cv2.findContours(self.mask(frame), cv2.RETR_EXTERNAL,
                                       cv2.CHAIN_APPROX_SIMPLE)
        boxes = []
        for c in contours:
            x, y, w, h = cv2.boundingRect(c)
            if w * h >= self.min_area:
                boxes.append((x, y, w, h))
        return sorted(boxes)


class IntensityDetector:
    """Foreground boxes from absolute intensity thresholding.

    Suits clips where objects are brighter than the background and may
    stand still for the whole clip (which a temporal background model
    would absorb).
    """

    def __init__(self, threshold: float = 50.0, min_area: int = 16):
        self.threshold = threshold
        self.min_area = min_area

    def fit(self, clip: np.ndarray) -> None:
        pass

    def mask(self, frame: np.ndarray) -> np.ndarray:
        mask = (frame > self.threshold).astype(np.uint8)
        kernel = np.ones((3, 3), np.uint8)
        return cv2.morphologyEx(mask, cv2.MORPH_OPEN, kernel)

    def detect(self, frame: np.ndarray) -> list:
        contours, _ = cv2.findContours(self.mask(frame), cv2.RETR_EXTERNAL,
                                       cv2.CHAIN_APPROX_SIMPLE)
        boxes = []
        for c in contours:
            x, y, w, h = cv2.boundingRect(c)
            if w * h >= self.min_area:
                boxes.append((x, y, w, h))
        return sorted(boxes)


# --- optical flow (dense, frame pair -> (H, W, 2)) ---

class FarnebackFlow:
    def __call__(self, prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
        return cv2.calcOpticalFlowFarneback(
            prev.astype(np.uint8), cur.astype(np.uint8), None,
            pyr_scale=0.5, levels=3, winsize=15, iterations=3,
            poly_n=5, poly_sigma=1.2, flags=0)


# --- pose (object crop mask -> 2K normalized silhouette landmarks) ---

class SilhouetteLandmarks:
    def __init__(self, n_points: int = 17):
        self.n_points = n_points

    @property
    def dim(self) -> int:
        return 2 * self.n_points

    def __call__(self, crop_mask: np.ndarray) -> np.ndarray:
        h, w = crop_mask.shape
        contours, _ = cv2.findContours(crop_mask.astype(np.uint8),
                                       cv2.RETR_EXTERNAL,
                                       cv2.CHAIN_APPROX_NONE)
        if not contours:
            return np.zeros(self.dim, dtype=np.float32)
        contour = max(contours, key=cv2.contourArea).reshape(-1, 2).astype(float)
        if len(contour) < 2:
            contour = np.vstack([contour, contour])
        closed = np.vstack([contour, contour[:1]])
        seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = cum[-1] if cum[-1] > 0 else 1.0
        targets = np.linspace(0.0, total, self.n_points, endpoint=False)
        xs = np.interp(targets, cum, closed[:, 0]) / max(w, 1)
        ys = np.interp(targets, cum, closed[:, 1]) / max(h, 1)
        return np.stack([xs, ys], axis=1).reshape(-1).astype(np.float32)


# --- image encoding (object crop -> pooled grayscale patch) ---

class GrayPoolEncoder:
    def __init__(self, side: int = 8):
        self.side = side

    @property
    def dim(self) -> int:
        return self.side * self.side

    def __call__(self, crop: np.ndarray) -> np.ndarray:
        patch = cv2.resize(crop.astype(np.float32), (self.side, self.side),
                           interpolation=cv2.INTER_AREA)
        return (patch / 255.0).reshape(-1).astype(np.float32)


# --- video encoding (16-frame block -> pooled spatiotemporal stats) ---

class BlockPoolEncoder:
    def __init__(self, side: int = 4):
        self.side = side

    @property
    def dim(self) -> int:
        return 2 * self.side * self.side

    def __call__(self, block: np.ndarray) -> np.ndarray:
        pooled = np.stack([
            cv2.resize(frame.astype(np.float32), (self.side, self.side),
                       interpolation=cv2.INTER_AREA)
            for frame in block]) / 255.0
        mean = pooled.mean(axis=0).reshape(-1)
        std = pooled.std(axis=0).reshape(-1)
        return np.concatenate([mean, std]).astype(np.float32)


DETECTORS = {"median-bgsub": MedianBackgroundDetector,
             "intensity-thresh": IntensityDetector}
FLOWS = {"farneback": FarnebackFlow}
POSES = {"silhouette-17": lambda: SilhouetteLandmarks(17)}
IMAGE_ENCODERS = {"gray-pool8": lambda: GrayPoolEncoder(8)}
VIDEO_ENCODERS = {"block-pool4": lambda: BlockPoolEncoder(4)}


def load_model(registry: dict, identifier: str, family: str):
    try:
        factory = registry[identifier]
    except KeyError:
        raise ModelLoadError(
            f"unknown {family} model {identifier!r}; "
            f"available: {sorted(registry)}") from None
    return factory()

"""Clip loading: a clip is a directory of image frames or a .npy stack.

Either form decodes to a float32 grayscale array of shape (T, H, W)
with values in [0, 255].
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from .errors import DecodeError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def _to_gray(stack: np.ndarray) -> np.ndarray:
    if stack.ndim == 4 and stack.shape[-1] == 3:
        # ITU-R BT.601 luma
        stack = (0.299 * stack[..., 2] + 0.587 * stack[..., 1]
                 + 0.114 * stack[..., 0])
    if stack.ndim != 3:
        raise DecodeError(f"expected (T,H,W) or (T,H,W,3), got {stack.shape}")
    return np.ascontiguousarray(stack, dtype=np.float32)


def load_clip(path) -> np.ndarray:
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        if not files:
            raise DecodeError(f"{path}: no image frames found")
        frames = []
        for p in files:
            img = cv2.imread(str(p), cv2.IMREAD_GRAYSCALE)
            if img is None:
                raise DecodeError(f"{p}: unreadable image")
            frames.append(img)
        shapes = {f.shape for f in frames}
        if len(shapes) != 1:
            raise DecodeError(f"{path}: inconsistent frame shapes {shapes}")
        return np.stack(frames).astype(np.float32)
    if path.suffix == ".npy":
        if not path.exists():
            raise DecodeError(f"{path}: no such file")
        try:
            stack = np.load(path)
        except (OSError, ValueError) as exc:
            raise DecodeError(f"{path}: {exc}") from exc
        return _to_gray(np.asarray(stack, dtype=np.float32))
    raise DecodeError(f"{path}: not a frame directory or .npy stack")

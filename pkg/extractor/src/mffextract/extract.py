"""Video clips -> multi-feature frame containers.

Per clip: detect foreground objects, track them across frames, and emit
one record per object per frame for pose, velocity (mean dense optical
flow inside the tracked box), and image encoding, plus one record per
non-overlapping block of frames for the video encoding. Output is a
container directory readable by vadkit.load_dataset.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from vadkit import Dataset, FeatureKind, FeatureRecord, VideoFeatureSet, save_dataset

from .errors import DecodeError, ExtractError, InvalidConfig
from .io import load_clip
from .models import (
    DETECTORS,
    FLOWS,
    IMAGE_ENCODERS,
    POSES,
    VIDEO_ENCODERS,
    load_model,
)
from .tracker import IouTracker

DEFAULT_MODELS = {
    "detector": "median-bgsub",
    "flow": "farneback",
    "pose": "silhouette-17",
    "image_encoder": "gray-pool8",
    "video_encoder": "block-pool4",
}


@dataclass
class ExtractionConfig:
    videos: list                 # clip paths (frame dirs or .npy stacks)
    output_root: str
    models: dict = field(default_factory=lambda: dict(DEFAULT_MODELS))
    block_length: int = 16
    device: str = "cpu"
    name: str = "extracted"
    workers: int = 1

    def validate(self) -> None:
        if not self.videos:
            raise InvalidConfig("no videos listed")
        if self.block_length < 1:
            raise InvalidConfig("block_length must be positive")
        if self.workers < 1:
            raise InvalidConfig("workers must be positive")
        unknown = set(self.models) - set(DEFAULT_MODELS)
        if unknown:
            raise InvalidConfig(f"unknown model families: {sorted(unknown)}")

    @classmethod
    def from_json(cls, obj: dict, output_root=None) -> "ExtractionConfig":
        obj = dict(obj)
        allowed = {"videos", "manifest", "output_root", "models",
                   "block_length", "device", "name", "workers"}
        unknown = set(obj) - allowed
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        manifest = obj.pop("manifest", None)
        if manifest is not None:
            if "videos" in obj:
                raise InvalidConfig("give either videos or manifest, not both")
            obj["videos"] = _videos_from_manifest(manifest)
        if output_root is not None:
            obj["output_root"] = str(output_root)
        if "output_root" not in obj:
            raise InvalidConfig("output_root is required")
        models = dict(DEFAULT_MODELS)
        models.update(obj.get("models", {}))
        obj["models"] = models
        return cls(**obj)

    @classmethod
    def from_json_file(cls, path, output_root=None) -> "ExtractionConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh), output_root=output_root)


def _videos_from_manifest(path) -> list:
    videos = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                videos.append(json.loads(line)["path"])
    return videos


def load_models(config: ExtractionConfig) -> dict:
    """Resolve every model identifier up front (fail fast)."""
    return {
        "detector": load_model(DETECTORS, config.models["detector"],
                               "detector"),
        "flow": load_model(FLOWS, config.models["flow"], "flow"),
        "pose": load_model(POSES, config.models["pose"], "pose"),
        "image_encoder": load_model(IMAGE_ENCODERS,
                                    config.models["image_encoder"],
                                    "image encoder"),
        "video_encoder": load_model(VIDEO_ENCODERS,
                                    config.models["video_encoder"],
                                    "video encoder"),
    }


def _crop(array: np.ndarray, box) -> np.ndarray:
    x, y, w, h = box
    return array[y:y + h, x:x + w]


def extract_clip(clip: np.ndarray, models: dict,
                 block_length: int, video_id: str) -> VideoFeatureSet:
    """Feature records for one decoded clip (T, H, W)."""
    detector = models["detector"]
    detector.fit(clip)
    tracker = IouTracker()
    pose_recs, vel_recs, img_recs, vid_recs = [], [], [], []

    flow = None
    for t, frame in enumerate(clip):
        if t > 0:
            flow = models["flow"](clip[t - 1], frame)
        mask = detector.mask(frame)
        tracked = sorted(tracker.update(detector.detect(frame)))
        for oid, box in tracked:
            pose_recs.append(FeatureRecord(
                t, models["pose"](_crop(mask, box)), 1, oid))
            if flow is None:
                velocity = np.zeros(2, dtype=np.float32)
            else:
                velocity = _crop(flow, box).reshape(-1, 2).mean(axis=0)
            vel_recs.append(FeatureRecord(
                t, velocity.astype(np.float32), 1, oid))
            img_recs.append(FeatureRecord(
                t, models["image_encoder"](_crop(frame, box)), 1, oid))

    for start in range(0, len(clip) - block_length + 1, block_length):
        vec = models["video_encoder"](clip[start:start + block_length])
        vid_recs.append(FeatureRecord(start, vec, block_length))

    return VideoFeatureSet(video_id, len(clip), {
        FeatureKind.POSE: pose_recs,
        FeatureKind.VELOCITY: vel_recs,
        FeatureKind.IMAGE_ENCODING: img_recs,
        FeatureKind.VIDEO_ENCODING: vid_recs,
    })


def extract(config: ExtractionConfig, log=sys.stderr) -> dict:
    """Run extraction; returns a summary dict. Per-video failures are
    logged and skipped; callers decide the exit code from `failed`."""
    config.validate()
    models = load_models(config)
    dims = {
        FeatureKind.POSE: models["pose"].dim,
        FeatureKind.VELOCITY: 2,
        FeatureKind.IMAGE_ENCODING: models["image_encoder"].dim,
        FeatureKind.VIDEO_ENCODING: models["video_encoder"].dim,
    }

    def one(path):
        clip = load_clip(path)
        video_id = Path(path).stem or Path(path).name
        print(f"extracting {path} ({len(clip)} frames)", file=log)
        return extract_clip(clip, models, config.block_length, video_id)

    videos, failed = [], []
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [(path, pool.submit(one, path)) for path in config.videos]
        for path, future in futures:
            try:
                videos.append(future.result())
            except (DecodeError, ExtractError, OSError) as exc:
                print(f"failed {path}: {exc}", file=log)
                failed.append(str(path))

    dataset = Dataset(config.name, train=videos, dims=dims)
    save_dataset(dataset, config.output_root)
    return {
        "output": str(config.output_root),
        "videos": len(config.videos),
        "succeeded": len(videos),
        "failed": failed,
        "dims": {kind.key: d for kind, d in dims.items()},
        "block_length": config.block_length,
        "models": dict(config.models),
    }

"""Synthetic datasets with controllable normal/abnormal structure.

Normal features are drawn per kind from a diagonal-covariance Gaussian
mixture; abnormal frames draw from the same mixture with a mean shift.
Video-encoding records cover non-overlapping 16-frame blocks and are
shifted iff the block overlaps an anomaly segment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .containers import (
    DEFAULT_BLOCK_LENGTH,
    Dataset,
    FeatureKind,
    FeatureRecord,
    VideoFeatureSet,
)
from .errors import InvalidConfig


@dataclass
class SynthConfig:
    n_train_videos: int
    n_test_videos: int
    frames_per_video: int
    dims: dict                      # FeatureKind -> D
    normal_mixture: dict            # FeatureKind -> [(weight, mean, diag_var)]
    anomaly_shift: dict             # FeatureKind -> shift vector
    anomaly_segments: list          # per test video: [(start, end), ...]
    objects_per_frame: int = 1
    block_length: int = DEFAULT_BLOCK_LENGTH
    seed: int = 0
    name: str = "synth"

    def validate(self) -> None:
        if min(self.n_train_videos, self.n_test_videos,
               self.frames_per_video, self.objects_per_frame,
               self.block_length) < 1:
            raise InvalidConfig("counts must be positive")
        if len(self.anomaly_segments) != self.n_test_videos:
            raise InvalidConfig("anomaly_segments must list one entry per test video")
        for kind, dim in self.dims.items():
            if kind is FeatureKind.VELOCITY and dim != 2:
                raise InvalidConfig("velocity dimension must be 2")
            comps = self.normal_mixture.get(kind)
            if not comps:
                raise InvalidConfig(f"no mixture for {kind.key}")
            total = sum(w for w, _, _ in comps)
            if abs(total - 1.0) > 1e-9:
                raise InvalidConfig(f"{kind.key}: mixture weights sum to {total}")
            for w, mean, var in comps:
                if w < 0:
                    raise InvalidConfig(f"{kind.key}: negative weight")
                if len(mean) != dim or len(var) != dim:
                    raise InvalidConfig(f"{kind.key}: component dimension != {dim}")
                if min(var) <= 0:
                    raise InvalidConfig(f"{kind.key}: covariance must be positive")
            if len(self.anomaly_shift.get(kind, ())) != dim:
                raise InvalidConfig(f"{kind.key}: anomaly_shift dimension != {dim}")
        for vi, segments in enumerate(self.anomaly_segments):
            prev_end = 0
            for start, end in sorted(segments):
                if start < prev_end or not (0 <= start < end <= self.frames_per_video):
                    raise InvalidConfig(
                        f"test video {vi}: bad segment [{start}, {end})")
                prev_end = end

    @classmethod
    def from_json(cls, obj: dict) -> "SynthConfig":
        obj = dict(obj)
        for key in ("dims", "normal_mixture", "anomaly_shift"):
            obj[key] = {FeatureKind.from_key(k): v for k, v in obj[key].items()}
        obj["anomaly_segments"] = [[tuple(seg) for seg in video]
                                   for video in obj["anomaly_segments"]]
        return cls(**obj)

    @classmethod
    def from_json_file(cls, path) -> "SynthConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _sample(rng, comps, dim, shift=None):
    weights = np.array([w for w, _, _ in comps])
    j = rng.choice(len(comps), p=weights)
    _, mean, var = comps[j]
    mean = np.asarray(mean, dtype=float)
    if shift is not None:
        mean = mean + shift
    return rng.normal(mean, np.sqrt(np.asarray(var, dtype=float)), size=dim)


def _segment_indicator(segments, n_frames):
    labels = np.zeros(n_frames, dtype=np.uint8)
    for start, end in segments:
        labels[start:end] = 1
    return labels


def generate(config: SynthConfig) -> Dataset:
    """Deterministic generation: same config (incl. seed) => bit-identical data."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    dataset = Dataset(name=config.name, dims=dict(config.dims))

    def make_video(video_id, segments):
        n = config.frames_per_video
        abnormal = _segment_indicator(segments or [], n)
        records = {}
        for kind, dim in config.dims.items():
            comps = config.normal_mixture[kind]
            shift = np.asarray(config.anomaly_shift[kind], dtype=float)
            recs = []
            if kind is FeatureKind.VIDEO_ENCODING:
                for start in range(0, n - config.block_length + 1,
                                   config.block_length):
                    hit = abnormal[start:start + config.block_length].any()
                    vec = _sample(rng, comps, dim, shift if hit else None)
                    recs.append(FeatureRecord(start, vec, config.block_length))
            else:
                for frame in range(n):
                    for obj in range(config.objects_per_frame):
                        vec = _sample(rng, comps, dim,
                                      shift if abnormal[frame] else None)
                        oid = obj if config.objects_per_frame > 1 else None
                        recs.append(FeatureRecord(frame, vec, 1, oid))
            records[kind] = recs
        return VideoFeatureSet(video_id, n, records,
                               ground_truth=abnormal if segments is not None else None)

    for i in range(config.n_train_videos):
        dataset.train.append(make_video(f"train_{i:03d}", None))
    for i in range(config.n_test_videos):
        dataset.test.append(make_video(f"test_{i:03d}",
                                       config.anomaly_segments[i]))
    return dataset


def default_config(shift_scale: float = 10.0, seed: int = 0,
                   n_train_videos: int = 10, n_test_videos: int = 10,
                   frames_per_video: int = 200) -> SynthConfig:
    """Separable-by-construction config: mean shift = shift_scale * sigma."""
    dims = {FeatureKind.POSE: 8, FeatureKind.VELOCITY: 2,
            FeatureKind.IMAGE_ENCODING: 8, FeatureKind.VIDEO_ENCODING: 8}
    mixture, shift = {}, {}
    for kind, dim in dims.items():
        mixture[kind] = [(1.0, [0.0] * dim, [1.0] * dim)]
        shift[kind] = [shift_scale] * dim
    n = frames_per_video
    segs = [(int(0.25 * n), int(0.40 * n)), (int(0.60 * n), int(0.75 * n))]
    segments = [list(segs) for _ in range(n_test_videos)]
    return SynthConfig(
        n_train_videos=n_train_videos, n_test_videos=n_test_videos,
        frames_per_video=frames_per_video, dims=dims,
        normal_mixture=mixture, anomaly_shift=shift,
        anomaly_segments=segments, seed=seed)

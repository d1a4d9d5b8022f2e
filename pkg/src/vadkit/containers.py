"""Feature container data model and on-disk format.

A dataset lives in a directory:

    <root>/meta.json
    <root>/<split>/<video_id>.<kind>.mff
    <root>/<split>/<video_id>.labels        (optional; test videos)

The .mff layout is little-endian: magic "MFF1", u8 kind tag, u32 vector
dimension, u64 record count, then per record u32 frame_index,
u32 block_length, i32 object_id (-1 = absent), D x f32 vector.
The .labels layout is u32 frame_count followed by frame_count bytes
(0 normal, 1 abnormal).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    LabelLengthMismatch,
    MagicMismatch,
    MissingFile,
    UnsortedRecords,
    ValidationError,
)

MAGIC = b"MFF1"
DEFAULT_BLOCK_LENGTH = 16


class FeatureKind(Enum):
    POSE = 0
    VELOCITY = 1
    IMAGE_ENCODING = 2
    VIDEO_ENCODING = 3

    @property
    def key(self) -> str:
        return self.name.lower()

    @property
    def short(self) -> str:
        return {"POSE": "P", "VELOCITY": "V",
                "IMAGE_ENCODING": "IE", "VIDEO_ENCODING": "VE"}[self.name]

    @classmethod
    def from_key(cls, key: str) -> "FeatureKind":
        return cls[key.upper()]

    @classmethod
    def from_short(cls, short: str) -> "FeatureKind":
        for k in cls:
            if k.short == short.upper():
                return k
        raise KeyError(short)


KIND_ORDER = (FeatureKind.POSE, FeatureKind.VELOCITY,
              FeatureKind.IMAGE_ENCODING, FeatureKind.VIDEO_ENCODING)


@dataclass
class FeatureRecord:
    frame_index: int
    vector: np.ndarray  # float32, shape (D,)
    block_length: int = 1
    object_id: Optional[int] = None

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float32)


@dataclass
class VideoFeatureSet:
    video_id: str
    frame_count: int
    records: dict  # FeatureKind -> list[FeatureRecord]
    ground_truth: Optional[np.ndarray] = None  # uint8, shape (frame_count,)

    def __post_init__(self):
        if self.ground_truth is not None:
            self.ground_truth = np.asarray(self.ground_truth, dtype=np.uint8)


@dataclass
class Dataset:
    name: str
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)
    dims: dict = field(default_factory=dict)  # FeatureKind -> D

    def split(self, name: str) -> list:
        if name == "train":
            return self.train
        if name == "test":
            return self.test
        raise KeyError(name)


def validate_dataset(dataset: Dataset, where: str = "<memory>") -> None:
    """Check every container invariant; raise the matching error."""
    for split_name, videos in (("train", dataset.train), ("test", dataset.test)):
        for video in videos:
            ctx = f"{where}:{split_name}/{video.video_id}"
            if video.frame_count <= 0:
                raise ValidationError(f"{ctx}: frame_count must be positive")
            for kind, records in video.records.items():
                dim = dataset.dims.get(kind)
                if dim is None:
                    raise DimensionMismatch(f"{ctx}: kind {kind.key} missing from dims")
                prev = (-1, -1)
                for i, rec in enumerate(records):
                    if rec.vector.shape != (dim,):
                        raise DimensionMismatch(
                            f"{ctx}.{kind.key} record {i}: dimension "
                            f"{rec.vector.shape[0]} != {dim}")
                    if kind is FeatureKind.VELOCITY and dim != 2:
                        raise DimensionMismatch(
                            f"{ctx}: velocity dimension must be 2, got {dim}")
                    if not np.all(np.isfinite(rec.vector)):
                        raise ValidationError(
                            f"{ctx}.{kind.key} record {i}: non-finite vector")
                    if rec.frame_index < 0 or rec.block_length < 1:
                        raise ValidationError(
                            f"{ctx}.{kind.key} record {i}: bad frame_index/block_length")
                    if rec.frame_index + rec.block_length > video.frame_count:
                        raise ValidationError(
                            f"{ctx}.{kind.key} record {i}: extends past frame count")
                    if kind is not FeatureKind.VIDEO_ENCODING and rec.block_length != 1:
                        raise ValidationError(
                            f"{ctx}.{kind.key} record {i}: block_length must be 1")
                    key = (rec.frame_index,
                           -1 if rec.object_id is None else rec.object_id)
                    if key < prev:
                        raise UnsortedRecords(
                            f"{ctx}.{kind.key} record {i}: records out of order")
                    prev = key
                if kind is FeatureKind.VIDEO_ENCODING:
                    end = -1
                    for i, rec in enumerate(records):
                        if rec.frame_index < end:
                            raise ValidationError(
                                f"{ctx}.{kind.key} record {i}: overlapping blocks")
                        end = rec.frame_index + rec.block_length
            if video.ground_truth is not None:
                if len(video.ground_truth) != video.frame_count:
                    raise LabelLengthMismatch(
                        f"{ctx}: {len(video.ground_truth)} labels for "
                        f"{video.frame_count} frames")
                if split_name == "train" and np.any(video.ground_truth):
                    raise ValidationError(f"{ctx}: train video has positive labels")
            elif split_name == "test":
                raise ValidationError(f"{ctx}: test video missing ground truth")


def _write_mff(path: Path, kind: FeatureKind, dim: int, records) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BIQ", kind.value, dim, len(records)))
        for rec in records:
            oid = -1 if rec.object_id is None else rec.object_id
            fh.write(struct.pack("<IIi", rec.frame_index, rec.block_length, oid))
            fh.write(np.asarray(rec.vector, dtype="<f4").tobytes())


def _read_mff(path: Path) -> tuple:
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise MagicMismatch(f"{path}: bad magic {data[:4]!r}")
    tag, dim, count = struct.unpack_from("<BIQ", data, 4)
    kind = FeatureKind(tag)
    offset = 4 + struct.calcsize("<BIQ")
    rec_size = struct.calcsize("<IIi") + 4 * dim
    if len(data) != offset + count * rec_size:
        raise MagicMismatch(f"{path}: truncated file ({len(data)} bytes)")
    records = []
    for i in range(count):
        frame_index, block_length, oid = struct.unpack_from("<IIi", data, offset)
        offset += struct.calcsize("<IIi")
        vec = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        records.append(FeatureRecord(frame_index, vec, block_length,
                                     None if oid < 0 else oid))
    return kind, dim, records


def save_dataset(dataset: Dataset, root_path) -> None:
    """Write the dataset; load_dataset(root_path) reproduces it bit-exactly."""
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "name": dataset.name,
        "videos": [{"id": v.video_id, "split": split, "frame_count": v.frame_count}
                   for split, videos in (("train", dataset.train),
                                         ("test", dataset.test))
                   for v in videos],
        "dims": {k.key: int(d) for k, d in dataset.dims.items()},
    }
    (root / "meta.json").write_text(json.dumps(meta, indent=2))
    for split, videos in (("train", dataset.train), ("test", dataset.test)):
        split_dir = root / split
        split_dir.mkdir(exist_ok=True)
        for video in videos:
            for kind, records in video.records.items():
                _write_mff(split_dir / f"{video.video_id}.{kind.key}.mff",
                           kind, dataset.dims[kind], records)
            if video.ground_truth is not None:
                with open(split_dir / f"{video.video_id}.labels", "wb") as fh:
                    fh.write(struct.pack("<I", video.frame_count))
                    fh.write(video.ground_truth.astype(np.uint8).tobytes())


def load_dataset(root_path) -> Dataset:
    """Load and fully validate a dataset directory."""
    root = Path(root_path)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise MissingFile(str(meta_path))
    meta = json.loads(meta_path.read_text())
    dims = {FeatureKind.from_key(k): int(d) for k, d in meta["dims"].items()}
    dataset = Dataset(name=meta["name"], dims=dims)
    for entry in meta["videos"]:
        vid, split, n_frames = entry["id"], entry["split"], int(entry["frame_count"])
        split_dir = root / split
        records = {}
        for kind in dims:
            mff = split_dir / f"{vid}.{kind.key}.mff"
            if not mff.exists():
                raise MissingFile(str(mff))
            file_kind, file_dim, recs = _read_mff(mff)
            if file_kind is not kind:
                raise MagicMismatch(f"{mff}: kind tag {file_kind.key}, "
                                    f"expected {kind.key}")
            if file_dim != dims[kind]:
                raise DimensionMismatch(f"{mff}: dimension {file_dim} != {dims[kind]}")
            records[kind] = recs
        labels_path = split_dir / f"{vid}.labels"
        ground_truth = None
        if labels_path.exists():
            raw = labels_path.read_bytes()
            (count,) = struct.unpack_from("<I", raw, 0)
            labels = np.frombuffer(raw, dtype=np.uint8, offset=4)
            if count != n_frames or len(labels) != count:
                raise LabelLengthMismatch(
                    f"{labels_path}: {count} declared, {len(labels)} stored, "
                    f"{n_frames} frames in meta")
            ground_truth = labels.copy()
        video = VideoFeatureSet(vid, n_frames, records, ground_truth)
        dataset.split(split).append(video)
    validate_dataset(dataset, where=str(root))
    return dataset


def frames_of(dataset: Dataset, split: str) -> list:
    """Global (video_id, frame_index) ordering; defines score-matrix rows."""
    return [(v.video_id, f)
            for v in dataset.split(split)
            for f in range(v.frame_count)]


def video_boundaries(dataset: Dataset, split: str) -> list:
    """Per-video (start, end) row ranges matching frames_of."""
    bounds, start = [], 0
    for v in dataset.split(split):
        bounds.append((start, start + v.frame_count))
        start += v.frame_count
    return bounds

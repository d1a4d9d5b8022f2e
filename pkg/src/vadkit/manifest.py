"""Benchmark split manifests built from an HMDB51-style directory tree.

A manifest lists (video path, class, split, label) with every abnormal
class wholly in test, normal test videos drawn by seeded sampling, and
the remaining normal videos forming train. Two built-in split
definitions cover an action-anomaly benchmark (run/walk normal,
cartwheel/climb abnormal) and a violence benchmark (9 normal vs 7
violent classes).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ClassMissing, InsufficientVideos

VIDEO_SUFFIXES = {".avi", ".mp4", ".mkv", ".mov", ".webm"}


@dataclass
class SplitSpec:
    name: str
    normal: dict       # class -> (n_train, n_test)
    abnormal: dict     # class -> n_test
    seed: int = 0
    class_dirs: dict = field(default_factory=dict)  # class -> directory name

    def dir_for(self, cls: str) -> str:
        return self.class_dirs.get(cls, cls)

    @property
    def n_train(self) -> int:
        return sum(tr for tr, _ in self.normal.values())

    @property
    def n_test(self) -> int:
        return (sum(te for _, te in self.normal.values())
                + sum(self.abnormal.values()))


def hmdb_ad_spec(seed: int = 0) -> SplitSpec:
    return SplitSpec(
        name="hmdb-ad",
        normal={"run": (207, 25), "walk": (473, 75)},
        abnormal={"cartwheel": 107, "climb": 108},
        seed=seed)


def hmdb_violence_spec(seed: int = 0) -> SplitSpec:
    return SplitSpec(
        name="hmdb-violence",
        normal={"run": (221, 11), "walk": (517, 31), "wave": (98, 6),
                "climb": (104, 4), "hug": (110, 8), "throw": (96, 6),
                "sit": (134, 8), "turn": (222, 18), "cartwheel": (99, 8)},
        abnormal={"fall": 136, "fencing": 116, "hit": 127, "punch": 126,
                  "sword": 127, "shoot": 103, "kick": 130},
        seed=seed,
        class_dirs={"fall": "fall_floor", "shoot": "shoot_gun"})


BUILTIN_SPECS = {"hmdb-ad": hmdb_ad_spec, "hmdb-violence": hmdb_violence_spec}


@dataclass
class ManifestEntry:
    path: str
    cls: str
    split: str   # train | test
    label: str   # normal | abnormal


@dataclass
class Manifest:
    dataset: str
    entries: list = field(default_factory=list)

    def save_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for e in self.entries:
                fh.write(json.dumps({"path": e.path, "class": e.cls,
                                     "split": e.split, "label": e.label}) + "\n")

    @classmethod
    def load_jsonl(cls, path, dataset: str = "") -> "Manifest":
        entries = []
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    entries.append(ManifestEntry(obj["path"], obj["class"],
                                                 obj["split"], obj["label"]))
        return cls(dataset=dataset, entries=entries)


def _class_pool(root: Path, spec: SplitSpec, cls: str) -> list:
    class_dir = root / spec.dir_for(cls)
    if not class_dir.is_dir():
        raise ClassMissing(f"class directory not found: {spec.dir_for(cls)!r}")
    return sorted(p.name for p in class_dir.iterdir()
                  if p.suffix.lower() in VIDEO_SUFFIXES)


def build_manifest(hmdb_root, spec: SplitSpec) -> Manifest:
    """Deterministic per seed; sorted by (split, class, filename)."""
    root = Path(hmdb_root)
    rng = np.random.default_rng(spec.seed)
    entries = []

    # Draws happen in sorted class order so the split is a pure function
    # of (tree, spec).
    for cls in sorted(spec.normal):
        n_train, n_test = spec.normal[cls]
        pool = _class_pool(root, spec, cls)
        if len(pool) < n_train + n_test:
            raise InsufficientVideos(
                f"{cls}: {len(pool)} videos, need {n_train + n_test}")
        if len(pool) != n_train + n_test:
            raise InsufficientVideos(
                f"{cls}: {len(pool)} videos cannot land exactly on "
                f"{n_train}+{n_test}")
        test_idx = set(rng.choice(len(pool), size=n_test, replace=False))
        for i, name in enumerate(pool):
            split = "test" if i in test_idx else "train"
            entries.append(ManifestEntry(f"{spec.dir_for(cls)}/{name}",
                                         cls, split, "normal"))
    for cls in sorted(spec.abnormal):
        n_test = spec.abnormal[cls]
        pool = _class_pool(root, spec, cls)
        if len(pool) < n_test:
            raise InsufficientVideos(f"{cls}: {len(pool)} videos, need {n_test}")
        if len(pool) > n_test:
            keep = set(rng.choice(len(pool), size=n_test, replace=False))
            pool = [name for i, name in enumerate(pool) if i in keep]
        for name in pool:
            entries.append(ManifestEntry(f"{spec.dir_for(cls)}/{name}",
                                         cls, "test", "abnormal"))

    entries.sort(key=lambda e: (e.split, e.cls, e.path))
    return Manifest(dataset=spec.name, entries=entries)


def audit_manifest(manifest: Manifest, spec: SplitSpec,
                   frame_counts: dict = None) -> dict:
    """Check every split invariant; report violations instead of raising."""
    violations = []
    seen = set()
    counts = {}  # (class, split) -> n
    for e in manifest.entries:
        if e.path in seen:
            violations.append(f"duplicate video: {e.path}")
        seen.add(e.path)
        if e.label == "abnormal" and e.split == "train":
            violations.append(f"abnormal video in train split: {e.path}")
        counts[(e.cls, e.split)] = counts.get((e.cls, e.split), 0) + 1

    for cls, (n_train, n_test) in spec.normal.items():
        if counts.get((cls, "train"), 0) != n_train:
            violations.append(f"{cls}: train count "
                              f"{counts.get((cls, 'train'), 0)} != {n_train}")
        if counts.get((cls, "test"), 0) != n_test:
            violations.append(f"{cls}: test count "
                              f"{counts.get((cls, 'test'), 0)} != {n_test}")
    for cls, n_test in spec.abnormal.items():
        if counts.get((cls, "train"), 0) != 0:
            violations.append(f"{cls}: abnormal videos present in train")
        if counts.get((cls, "test"), 0) != n_test:
            violations.append(f"{cls}: test count "
                              f"{counts.get((cls, 'test'), 0)} != {n_test}")

    n_train = sum(1 for e in manifest.entries if e.split == "train")
    n_test = sum(1 for e in manifest.entries if e.split == "test")
    report = {"dataset": manifest.dataset, "n_train": n_train,
              "n_test": n_test, "violations": violations}
    if n_train != spec.n_train:
        violations.append(f"train total {n_train} != {spec.n_train}")
    if n_test != spec.n_test:
        violations.append(f"test total {n_test} != {spec.n_test}")

    if frame_counts is not None:
        totals = {"train": 0, "test": 0}
        missing = 0
        for e in manifest.entries:
            if e.path in frame_counts:
                totals[e.split] += int(frame_counts[e.path])
            else:
                missing += 1
        report["frames"] = {"train": totals["train"], "test": totals["test"],
                            "total": totals["train"] + totals["test"],
                            "videos_without_counts": missing}
    return report

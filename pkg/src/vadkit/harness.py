"""Experiment orchestration: config-driven runs, ablations, and sweeps."""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import synth
from .containers import (
    Dataset,
    FeatureKind,
    KIND_ORDER,
    frames_of,
    load_dataset,
    video_boundaries,
)
from .density import (
    DensityConfig,
    FrameScores,
    fit_density_models,
    save_models,
    score_dataset,
)
from .errors import InvalidConfig
from .fusion import LogRegHyper, ScoreMatrix, build_matrix
from .postprocess import EvalReport, SmoothingConfig, run_trials

DEFAULT_ALPHAS = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.10, 0.20, 0.50, 0.90)

ABLATION_SUBSETS = (
    ("VE", ("VE",), False),
    ("P+V", ("P", "V"), False),
    ("P+V+IE", ("P", "V", "IE"), False),
    ("P+V+VE", ("P", "V", "VE"), False),
    ("P+V+IE+VE", ("P", "V", "IE", "VE"), False),
    ("P+V+IE+VE+max", ("P", "V", "IE", "VE"), True),
)


@dataclass
class ExperimentConfig:
    dataset_path: str = None
    synth_config: synth.SynthConfig = None
    features: tuple = ("P", "V", "IE", "VE")
    include_max: bool = True
    aggregation: str = "max"
    density: DensityConfig = field(default_factory=DensityConfig)
    alpha: float = 0.02
    n_trials: int = 100
    logreg: LogRegHyper = field(default_factory=LogRegHyper)
    smoothing_sigma: float = 3.0
    base_seed: int = 0
    output_dir: str = "out"

    def validate(self) -> None:
        if (self.dataset_path is None) == (self.synth_config is None):
            raise InvalidConfig("exactly one of dataset/synth must be set")
        if not self.features:
            raise InvalidConfig("feature subset is empty")
        for f in self.features:
            FeatureKind.from_short(f)
        if not 0.0 <= self.alpha <= 0.9:
            raise InvalidConfig(f"alpha={self.alpha} outside [0, 0.9]")
        if self.n_trials < 1:
            raise InvalidConfig("n_trials must be >= 1")
        if self.aggregation not in ("max", "mean"):
            raise InvalidConfig(f"unknown aggregation {self.aggregation!r}")

    @property
    def kinds(self) -> tuple:
        wanted = {FeatureKind.from_short(f) for f in self.features}
        return tuple(k for k in KIND_ORDER if k in wanted)

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        known = {"dataset", "synth", "features", "include_max", "aggregation",
                 "density", "fusion", "smoothing_sigma", "base_seed",
                 "output_dir"}
        unknown = set(obj) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        if "dataset" in obj:
            cfg.dataset_path = obj["dataset"]
        if "synth" in obj:
            cfg.synth_config = synth.SynthConfig.from_json(obj["synth"])
        if "features" in obj:
            cfg.features = tuple(obj["features"])
        cfg.include_max = bool(obj.get("include_max", cfg.include_max))
        cfg.aggregation = obj.get("aggregation", cfg.aggregation)
        if "density" in obj:
            d = dict(obj["density"])
            unknown = set(d) - {"gmm_components", "k", "seed", "tol", "max_iter"}
            if unknown:
                raise InvalidConfig(f"unknown density keys: {sorted(unknown)}")
            if "k" in d:
                d["k"] = {FeatureKind.from_key(k): v for k, v in d["k"].items()}
            cfg.density = DensityConfig(**d)
        if "fusion" in obj:
            f = dict(obj["fusion"])
            unknown = set(f) - {"alpha", "n_trials", "learning_rate",
                                "max_iter", "tol"}
            if unknown:
                raise InvalidConfig(f"unknown fusion keys: {sorted(unknown)}")
            cfg.alpha = float(f.pop("alpha", cfg.alpha))
            cfg.n_trials = int(f.pop("n_trials", cfg.n_trials))
            cfg.logreg = LogRegHyper(seed=cfg.base_seed, **f)
        cfg.smoothing_sigma = float(obj.get("smoothing_sigma",
                                            cfg.smoothing_sigma))
        cfg.base_seed = int(obj.get("base_seed", cfg.base_seed))
        cfg.output_dir = obj.get("output_dir", cfg.output_dir)
        cfg.validate()
        return cfg

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def resolved(self) -> dict:
        return {
            "dataset": self.dataset_path,
            "synth": None if self.synth_config is None else "inline",
            "features": list(self.features),
            "include_max": self.include_max,
            "aggregation": self.aggregation,
            "density": {"gmm_components": self.density.gmm_components,
                        "k": {k.key: v for k, v in self.density.k.items()},
                        "seed": self.density.seed, "tol": self.density.tol,
                        "max_iter": self.density.max_iter},
            "fusion": {"alpha": self.alpha, "n_trials": self.n_trials,
                       "learning_rate": self.logreg.learning_rate,
                       "max_iter": self.logreg.max_iter,
                       "tol": self.logreg.tol},
            "smoothing_sigma": self.smoothing_sigma,
            "base_seed": self.base_seed,
        }


def dataset_content_hash(dataset: Dataset) -> str:
    h = hashlib.sha256()
    h.update(dataset.name.encode())
    for split, videos in (("train", dataset.train), ("test", dataset.test)):
        for v in videos:
            h.update(f"{split}:{v.video_id}:{v.frame_count}".encode())
            for kind in sorted(v.records, key=lambda k: k.value):
                h.update(bytes([kind.value]))
                for rec in v.records[kind]:
                    h.update(np.int64([rec.frame_index, rec.block_length,
                                       -1 if rec.object_id is None
                                       else rec.object_id]).tobytes())
                    h.update(rec.vector.astype("<f4").tobytes())
            if v.ground_truth is not None:
                h.update(v.ground_truth.tobytes())
    return h.hexdigest()


def resolve_dataset(config: ExperimentConfig) -> Dataset:
    if config.dataset_path is not None:
        return load_dataset(config.dataset_path)
    return synth.generate(config.synth_config)


def test_labels(dataset: Dataset) -> np.ndarray:
    return np.concatenate([v.ground_truth for v in dataset.test])


def pipeline_scores(dataset: Dataset, config: ExperimentConfig) -> FrameScores:
    models, calib = fit_density_models(dataset, config.density,
                                       kinds=config.kinds)
    return score_dataset(dataset, models, calib, agg=config.aggregation)


def evaluate_matrix(X: ScoreMatrix, labels, boundaries,
                    config: ExperimentConfig, alpha: float = None,
                    include_max_in_mean: bool = False) -> EvalReport:
    alpha = config.alpha if alpha is None else alpha
    return run_trials(X, labels, boundaries, alpha=alpha,
                      n_trials=config.n_trials, base_seed=config.base_seed,
                      smoothing=SmoothingConfig(sigma=config.smoothing_sigma),
                      hyper=config.logreg,
                      include_max_in_mean=include_max_in_mean)


def _write_timelines(out_dir: Path, dataset: Dataset, smoothed: np.ndarray):
    tl_dir = out_dir / "timelines"
    tl_dir.mkdir(exist_ok=True)
    row = 0
    for v in dataset.test:
        with open(tl_dir / f"{v.video_id}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frame", "score", "label"])
            for f in range(v.frame_count):
                writer.writerow([f, f"{smoothed[row + f]:.10f}",
                                 int(v.ground_truth[f])])
        row += v.frame_count


def run_experiment(config: ExperimentConfig) -> EvalReport:
    """Full pipeline run; writes report, models, and per-video timelines."""
    config.validate()
    dataset = resolve_dataset(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    models, calib = fit_density_models(dataset, config.density,
                                       kinds=config.kinds)
    save_models(out_dir / "models.bin", models, calib)
    scores = score_dataset(dataset, models, calib, agg=config.aggregation)
    X = build_matrix(scores, include_max=config.include_max)
    labels = test_labels(dataset)
    boundaries = video_boundaries(dataset, "test")

    captured = {}

    def keep_first(trial, split, eval_idx, smoothed, labels_):
        if trial == 0:
            captured["smoothed"] = smoothed

    report = evaluate_matrix(X, labels, boundaries, config)
    # re-run trial 0 capture for the timeline artifact
    run_trials(X, labels, boundaries, alpha=config.alpha, n_trials=1,
               base_seed=config.base_seed,
               smoothing=SmoothingConfig(sigma=config.smoothing_sigma),
               hyper=config.logreg, on_trial=keep_first)

    payload = report.to_json()
    payload["config"] = config.resolved()
    payload["dataset_hash"] = dataset_content_hash(dataset)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    report.save_csv(out_dir / "report.csv", dataset=dataset.name,
                    config_hash=hashlib.sha256(
                        json.dumps(config.resolved(), sort_keys=True)
                        .encode()).hexdigest()[:16])
    _write_timelines(out_dir, dataset, captured["smoothed"])
    return report


def _subset_matrix(scores: FrameScores, shorts: tuple,
                   include_max: bool) -> ScoreMatrix:
    wanted = tuple(FeatureKind.from_short(s) for s in shorts)
    cols = [scores.kinds.index(k) for k in wanted]
    sub = FrameScores(scores.frames, wanted, scores.values[:, cols])
    return build_matrix(sub, include_max=include_max)


def run_feature_ablation(config: ExperimentConfig,
                         out_csv=None, workers: int = 1) -> list:
    """The six-subset ablation at alpha = 0 (unsupervised mean fusion)."""
    config.validate()
    dataset = resolve_dataset(config)
    models, calib = fit_density_models(dataset, config.density)
    scores = score_dataset(dataset, models, calib, agg=config.aggregation)
    labels = test_labels(dataset)
    boundaries = video_boundaries(dataset, "test")

    def cell(args):
        name, shorts, with_max = args
        X = _subset_matrix(scores, shorts, include_max=with_max)
        report = evaluate_matrix(X, labels, boundaries, config, alpha=0.0,
                                 include_max_in_mean=with_max)
        return (name, report.mean_auc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(cell, ABLATION_SUBSETS))
    else:
        rows = [cell(args) for args in ABLATION_SUBSETS]

    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["configuration", "auc"])
            for name, auc in rows:
                writer.writerow([name, f"{auc:.10f}"])
    return rows


def run_alpha_sweep(config: ExperimentConfig, alphas=DEFAULT_ALPHAS,
                    out_csv=None, workers: int = 1) -> list:
    """mean +/- std per (alpha, with/without max column)."""
    config.validate()
    for a in alphas:
        if not 0.0 <= a <= 0.9:
            raise InvalidConfig(f"alpha={a} outside [0, 0.9]")
    dataset = resolve_dataset(config)
    scores = pipeline_scores(dataset, config)
    labels = test_labels(dataset)
    boundaries = video_boundaries(dataset, "test")

    cells = [(a, with_max) for with_max in (False, True) for a in alphas]

    def cell(args):
        a, with_max = args
        X = build_matrix(scores, include_max=with_max)
        report = evaluate_matrix(X, labels, boundaries, config, alpha=a)
        return (a, with_max, report.mean_auc, report.std_auc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(cell, cells))
    else:
        rows = [cell(args) for args in cells]

    if out_csv is not None:
        with open(out_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["alpha", "with_max", "mean_auc", "std_auc"])
            for a, with_max, mean, std in rows:
                writer.writerow([a, int(with_max),
                                 f"{mean:.10f}", f"{std:.10f}"])
    return rows

"""Temporal smoothing, exact frame-level ROC-AUC, and trial aggregation.

Smoothing is a truncated discrete Gaussian convolution whose kernel is
renormalized over the in-bounds taps at every position, so edges stay
convex combinations of the input and videos never bleed into each other.
AUC uses the rank-sum (Mann-Whitney) statistic with midranks for ties.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyInput, SingleClassError
from .fusion import (
    LogRegHyper,
    ScoreMatrix,
    fuse_unsupervised,
    predict,
    sample_split,
    train_logreg,
)


@dataclass
class SmoothingConfig:
    sigma: float = 3.0
    radius: Optional[int] = None  # defaults to ceil(3 * sigma)

    def effective_radius(self) -> int:
        if self.radius is not None:
            return int(self.radius)
        return max(1, math.ceil(3.0 * self.sigma))


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    taps = np.arange(-radius, radius + 1, dtype=float)
    weights = np.exp(-0.5 * (taps / sigma) ** 2)
    return weights / weights.sum()


def gaussian_smooth(scores, config: SmoothingConfig) -> np.ndarray:
    """Smooth one video's scores; edge taps renormalized to sum to 1.

    Computed in difference form, out[i] = x[i] + sum(w * (window - x[i])) / sum(w),
    so constant sequences are bitwise fixpoints and sigma -> 0 is the identity.
    """
    x = np.asarray(scores, dtype=float)
    if x.size == 0:
        raise EmptyInput("nothing to smooth")
    if not np.all(np.isfinite(x)):
        raise EmptyInput("scores contain non-finite values")
    radius = config.effective_radius()
    kernel = gaussian_kernel(config.sigma, radius)
    n = len(x)
    out = np.empty(n)
    for i in range(n):
        lo, hi = max(0, i - radius), min(n, i + radius + 1)
        w = kernel[lo - i + radius:hi - i + radius]
        out[i] = x[i] + w @ (x[lo:hi] - x[i]) / w.sum()
    # weighted averages; clamp away any last-ulp rounding excursion
    return np.clip(out, x.min(), x.max())


def smooth_per_video(scores: np.ndarray, boundaries,
                     config: SmoothingConfig) -> np.ndarray:
    """Apply gaussian_smooth independently within each (start, end) range."""
    out = np.array(scores, dtype=float)
    for start, end in boundaries:
        out[start:end] = gaussian_smooth(scores[start:end], config)
    return out


def roc_auc(scores, labels) -> float:
    """Exact AUC from midranks: (R+ - n+(n+ + 1)/2) / (n+ n-)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError(f"{n_pos} positives, {n_neg} negatives")
    ranks = rankdata(scores)
    rank_sum = float(np.sum(ranks[labels == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; used to derive independent per-trial seeds."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def trial_seed(base_seed: int, trial: int) -> int:
    return (base_seed ^ splitmix64(trial)) & 0xFFFFFFFFFFFFFFFF


@dataclass
class TrialRecord:
    seed: int
    alpha: float
    auc: Optional[float]
    n_eval: int
    failed: bool = False


@dataclass
class EvalReport:
    mean_auc: float
    std_auc: float
    n_trials: int
    failures: int
    alpha: float
    trials: list = field(default_factory=list)

    @property
    def auc(self) -> float:
        return self.mean_auc

    def to_json(self) -> dict:
        return {"mean_auc": self.mean_auc, "std_auc": self.std_auc,
                "n_trials": self.n_trials, "failures": self.failures,
                "alpha": self.alpha,
                "trials": [{"seed": t.seed, "alpha": t.alpha, "auc": t.auc,
                            "n_eval": t.n_eval, "failed": t.failed}
                           for t in self.trials]}

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)

    def save_csv(self, path, dataset: str = "", config_hash: str = "") -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "config_hash", "alpha", "mean_auc",
                             "std_auc", "n_trials", "failures"])
            writer.writerow([dataset, config_hash, self.alpha,
                             f"{self.mean_auc:.10f}", f"{self.std_auc:.10f}",
                             self.n_trials, self.failures])


def run_trials(X: ScoreMatrix, labels, video_boundaries, alpha: float,
               n_trials: int, base_seed: int,
               smoothing: SmoothingConfig = None,
               hyper: LogRegHyper = None,
               include_max_in_mean: bool = False,
               on_trial: Callable = None) -> EvalReport:
    """Repeated sample-train-predict-smooth-evaluate trials.

    alpha = 0 degenerates to one deterministic trial of unsupervised mean
    fusion evaluated on all frames. Evaluation only ever reads eval
    indices; training frames never enter the AUC.
    """
    labels = np.asarray(labels)
    smoothing = smoothing or SmoothingConfig()
    hyper = hyper or LogRegHyper()
    n = X.n_frames
    if len(labels) != n:
        raise SingleClassError(f"{len(labels)} labels for {n} rows")

    trials = []
    if alpha == 0.0:
        fused = fuse_unsupervised(X, include_max=include_max_in_mean)
        smoothed = smooth_per_video(fused, video_boundaries, smoothing)
        value = roc_auc(smoothed, labels)
        trials.append(TrialRecord(base_seed, 0.0, value, n))
        if on_trial is not None:
            on_trial(0, None, np.arange(n), smoothed, labels)
    else:
        for t in range(n_trials):
            seed = trial_seed(base_seed, t)
            split = sample_split(n, alpha, seed)
            try:
                model = train_logreg(X.values[split.train_indices],
                                     labels[split.train_indices],
                                     hyper=hyper, alpha=alpha)
                if model.single_class:
                    # a one-label training sample yields an arbitrary
                    # ranking; discard the trial like a degenerate eval set
                    trials.append(TrialRecord(seed, alpha, None,
                                              len(split.eval_indices),
                                              failed=True))
                    continue
                fused = predict(model, X)
                smoothed = smooth_per_video(fused, video_boundaries, smoothing)
                value = roc_auc(smoothed[split.eval_indices],
                                labels[split.eval_indices])
                trials.append(TrialRecord(seed, alpha, value,
                                          len(split.eval_indices)))
                if on_trial is not None:
                    on_trial(t, split, split.eval_indices, smoothed, labels)
            except SingleClassError:
                trials.append(TrialRecord(seed, alpha, None,
                                          len(split.eval_indices), failed=True))

    good = [t.auc for t in trials if not t.failed]
    failures = sum(t.failed for t in trials)
    mean = float(np.mean(good)) if good else float("nan")
    std = float(np.std(good)) if good else float("nan")
    return EvalReport(mean_auc=mean, std_auc=std, n_trials=len(trials),
                      failures=failures, alpha=alpha, trials=trials)

"""Score-matrix assembly and logistic-regression fusion.

The matrix X has one row per test frame (frames_of order) and one column
per feature kind, optionally extended with a max column holding the
row-wise maximum of the base columns. Fusion is a logistic regression
h(x) = sigmoid(W.x + B) trained by full-batch gradient descent on the
mean binary cross-entropy, from zero initialization.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .density import FrameScores
from .errors import InvalidAlpha, NoSamples, ShapeMismatch, SingleClassWarning


@dataclass
class ScoreMatrix:
    values: np.ndarray   # (n_frames, n_columns)
    kinds: tuple         # base column kinds, in order
    has_max: bool = False

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def base(self) -> np.ndarray:
        return self.values[:, :len(self.kinds)]


def build_matrix(scores: FrameScores, include_max: bool = False) -> ScoreMatrix:
    base = np.asarray(scores.values, dtype=float)
    if include_max:
        values = np.column_stack([base, base.max(axis=1)])
    else:
        values = base.copy()
    return ScoreMatrix(values, tuple(scores.kinds), has_max=include_max)


@dataclass
class SplitSample:
    train_indices: np.ndarray
    eval_indices: np.ndarray
    alpha: float
    seed: int


def sample_split(n_frames: int, alpha: float, seed: int) -> SplitSample:
    """Uniform sample without replacement of round(alpha * n) train frames."""
    if not 0.0 <= alpha < 1.0:
        raise InvalidAlpha(f"alpha={alpha} outside [0, 1)")
    if n_frames < 1:
        raise InvalidAlpha("need at least one frame")
    n_train = int(round(alpha * n_frames))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_frames)
    return SplitSample(train_indices=np.sort(perm[:n_train]),
                       eval_indices=np.sort(perm[n_train:]),
                       alpha=alpha, seed=seed)


def _sigmoid(t: np.ndarray) -> np.ndarray:
    return expit(np.asarray(t, dtype=float))


def bce_loss(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def bce_gradient(X: np.ndarray, y: np.ndarray, w: np.ndarray,
                 b: float) -> tuple:
    """Analytic gradient of the mean binary cross-entropy."""
    p = _sigmoid(X @ w + b)
    err = p - y
    return X.T @ err / len(y), float(np.mean(err))


@dataclass
class FusionModel:
    weights: np.ndarray
    bias: float
    alpha: float = 0.0
    seed: int = 0
    learning_rate: float = 0.1
    iterations: int = 0
    final_loss: float = 0.0
    single_class: bool = False
    loss_trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias,
                "alpha": self.alpha, "seed": self.seed,
                "learning_rate": self.learning_rate,
                "iterations": self.iterations, "final_loss": self.final_loss,
                "single_class": self.single_class}

    @classmethod
    def from_json(cls, obj: dict) -> "FusionModel":
        obj = dict(obj)
        obj["weights"] = np.asarray(obj["weights"], dtype=float)
        return cls(**obj)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


@dataclass
class LogRegHyper:
    learning_rate: float = 0.1
    max_iter: int = 5000
    tol: float = 1e-8
    seed: int = 0


def train_logreg(X: np.ndarray, y: np.ndarray,
                 hyper: LogRegHyper = None, alpha: float = 0.0) -> FusionModel:
    """Full-batch gradient descent from W = 0, B = 0; deterministic."""
    hyper = hyper or LogRegHyper()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise NoSamples("training sample is empty")
    if len(X) != len(y):
        raise ShapeMismatch(f"{len(X)} rows vs {len(y)} labels")

    single_class = len(np.unique(y)) < 2
    if single_class:
        warnings.warn("training sample contains a single label",
                      SingleClassWarning)

    w = np.zeros(X.shape[1])
    b = 0.0
    n = len(y)
    trace = []
    iterations = 0
    for iterations in range(1, hyper.max_iter + 1):
        p = _sigmoid(X @ w + b)
        trace.append(bce_loss(p, y))
        err = p - y
        grad_w = X.T @ err / n
        grad_b = float(err.mean())
        if np.sqrt(grad_w @ grad_w + grad_b * grad_b) < hyper.tol:
            break
        w -= hyper.learning_rate * grad_w
        b -= hyper.learning_rate * grad_b

    final = bce_loss(_sigmoid(X @ w + b), y)
    return FusionModel(weights=w, bias=b, alpha=alpha, seed=hyper.seed,
                       learning_rate=hyper.learning_rate,
                       iterations=iterations, final_loss=final,
                       single_class=single_class, loss_trace=trace)


def predict(model: FusionModel, X) -> np.ndarray:
    """Row-wise sigmoid(W.x + B); values strictly inside (0, 1)."""
    values = X.values if isinstance(X, ScoreMatrix) else np.asarray(X, dtype=float)
    if values.shape[1] != len(model.weights):
        raise ShapeMismatch(f"{values.shape[1]} columns vs "
                            f"{len(model.weights)} weights")
    return _sigmoid(values @ model.weights + model.bias)


def fuse_unsupervised(X: ScoreMatrix, include_max: bool = False) -> np.ndarray:
    """Arithmetic mean of the base columns (the alpha = 0 baseline)."""
    values = X.values if include_max else X.base
    return values.mean(axis=1)

"""Per-feature density models, score calibration, and frame-level scoring.

Velocity features (2-D) get a Gaussian mixture fitted by EM; the
high-dimensional kinds get an exact k-nearest-neighbor index. Raw scores
are negative log-likelihood (GMM) or k-th-neighbor distance (kNN), both
increasing with atypicality, then min-max calibrated against the
training set and clamped to [0, 1].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .containers import Dataset, FeatureKind, KIND_ORDER, frames_of
from .errors import (
    DegenerateComponent,
    EmptyIndex,
    EmptyInput,
    ModelKindMissing,
    TooFewSamples,
)

COV_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# Gaussian mixture (EM)
# ---------------------------------------------------------------------------

@dataclass
class GmmModel:
    weights: np.ndarray       # (K,)
    means: np.ndarray         # (K, D)
    covariances: np.ndarray   # (K, D, D)
    n_iter: int = 0
    final_log_likelihood: float = 0.0
    log_likelihood_trace: list = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.weights)


def _log_gaussian(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Log density of N(mean, cov) at rows of x, via Cholesky."""
    d = x.shape[1]
    chol = np.linalg.cholesky(cov)
    diff = x - mean
    solved = np.linalg.solve(chol, diff.T)
    maha = np.sum(solved ** 2, axis=0)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (d * np.log(2.0 * np.pi) + log_det + maha)


def _component_log_probs(model, x: np.ndarray) -> np.ndarray:
    """(n, K) matrix of log w_j + log N(x; mu_j, Sigma_j)."""
    parts = [np.log(model.weights[j]) +
             _log_gaussian(x, model.means[j], model.covariances[j])
             for j in range(model.n_components)]
    return np.stack(parts, axis=1)


def _regularize(cov: np.ndarray) -> tuple:
    """Floor the diagonal and cap correlations so cov stays PD."""
    floored = False
    cov = cov.copy()
    d = cov.shape[0]
    for i in range(d):
        if cov[i, i] < COV_FLOOR:
            cov[i, i] = COV_FLOOR
            floored = True
    # cap off-diagonals to keep the matrix positive-definite
    for i in range(d):
        for j in range(i + 1, d):
            limit = 0.999 * np.sqrt(cov[i, i] * cov[j, j])
            if abs(cov[i, j]) > limit:
                cov[i, j] = cov[j, i] = np.sign(cov[i, j]) * limit
                floored = True
    return cov, floored


def _kmeans_pp_centers(x: np.ndarray, k: int, rng) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min([np.sum((x - c) ** 2, axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(len(x))])
        else:
            centers.append(x[rng.choice(len(x), p=d2 / total)])
    return np.array(centers)


def fit_gmm(samples, n_components: int, seed: int = 0,
            tol: float = 1e-6, max_iter: int = 200) -> GmmModel:
    """EM fit with k-means++ seeding; mean log-likelihood is non-decreasing."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or len(x) < n_components:
        raise TooFewSamples(
            f"{len(x)} samples for {n_components} components")
    if not np.all(np.isfinite(x)):
        raise TooFewSamples("samples contain non-finite values")
    n, d = x.shape
    rng = np.random.default_rng(seed)

    means = _kmeans_pp_centers(x, n_components, rng)
    base_cov = np.cov(x, rowvar=False).reshape(d, d)
    base_cov, _ = _regularize(base_cov)
    covs = np.array([base_cov] * n_components)
    weights = np.full(n_components, 1.0 / n_components)
    model = GmmModel(weights, means, covs)

    trace = []
    floor_hits = 0
    for iteration in range(max_iter):
        log_probs = _component_log_probs(model, x)
        log_norm = logsumexp(log_probs, axis=1)
        ll = float(np.mean(log_norm))
        trace.append(ll)

        resp = np.exp(log_probs - log_norm[:, None])
        nk = resp.sum(axis=0)
        if np.any(nk < 1e-12):
            raise DegenerateComponent("a component lost all responsibility")
        weights = nk / n
        means = (resp.T @ x) / nk[:, None]
        covs = np.empty_like(model.covariances)
        for j in range(n_components):
            diff = x - means[j]
            cov = (resp[:, j, None] * diff).T @ diff / nk[j]
            cov, floored = _regularize(cov)
            floor_hits += floored
            covs[j] = cov
        if floor_hits > 10 * n_components:
            raise DegenerateComponent("covariance floor reached repeatedly")
        model = GmmModel(weights, means, covs)

        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < tol:
            break

    model.n_iter = len(trace)
    model.final_log_likelihood = trace[-1]
    model.log_likelihood_trace = trace
    return model


def gmm_score(model: GmmModel, x) -> float:
    """Negative log-likelihood of x under the mixture."""
    return float(gmm_score_batch(model, np.asarray(x, dtype=float)[None, :])[0])


def gmm_score_batch(model: GmmModel, x: np.ndarray) -> np.ndarray:
    return -logsumexp(_component_log_probs(model, np.asarray(x, dtype=float)),
                      axis=1)


# ---------------------------------------------------------------------------
# kNN index
# ---------------------------------------------------------------------------

@dataclass
class KnnIndex:
    vectors: np.ndarray  # (N, D)
    k: int = 1

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or len(self.vectors) == 0:
            raise EmptyIndex("index requires a non-empty (N, D) array")
        if not 1 <= self.k <= len(self.vectors):
            raise EmptyIndex(f"k={self.k} with {len(self.vectors)} stored vectors")


def knn_score(index: KnnIndex, x) -> float:
    """Euclidean distance to the k-th nearest stored vector."""
    return float(knn_score_batch(index, np.asarray(x, dtype=float)[None, :])[0])


def knn_score_batch(index: KnnIndex, x: np.ndarray, rank: int = None) -> np.ndarray:
    """Exact brute-force search, chunked to bound memory."""
    rank = index.k if rank is None else rank
    queries = np.atleast_2d(np.asarray(x, dtype=float))
    n = len(index.vectors)
    out = np.empty(len(queries))
    chunk = max(1, int(2e7) // max(1, n * queries.shape[1]))
    for start in range(0, len(queries), chunk):
        block = queries[start:start + chunk]
        d2 = np.sum((block[:, None, :] - index.vectors[None, :, :]) ** 2,
                    axis=2)
        kth = np.partition(d2, rank - 1, axis=1)[:, rank - 1]
        out[start:start + len(block)] = np.sqrt(kth)
    return out


def knn_train_scores(index: KnnIndex) -> np.ndarray:
    """Scores of the stored vectors against their own index.

    Self-matches are excluded (k+1-th neighbor) so k=1 calibration does
    not degenerate to an all-zero range; with too few vectors the plain
    k-th-neighbor score is used.
    """
    if len(index.vectors) > index.k:
        return knn_score_batch(index, index.vectors, rank=index.k + 1)
    return knn_score_batch(index, index.vectors)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

@dataclass
class CalibrationStats:
    train_min: float
    train_max: float


def fit_calibration(train_scores) -> CalibrationStats:
    scores = np.asarray(train_scores, dtype=float)
    if scores.size == 0:
        raise EmptyInput("no training scores")
    if not np.all(np.isfinite(scores)):
        raise EmptyInput("training scores contain non-finite values")
    return CalibrationStats(float(scores.min()), float(scores.max()))


def apply_calibration(stats: CalibrationStats, score) -> np.ndarray:
    """Affine min-max rescale clamped to [0, 1]."""
    score = np.asarray(score, dtype=float)
    span = stats.train_max - stats.train_min
    if span == 0.0:
        return np.where(score <= stats.train_min, 0.0, 1.0)[()]
    return np.clip((score - stats.train_min) / span, 0.0, 1.0)[()]


# ---------------------------------------------------------------------------
# Dataset scoring
# ---------------------------------------------------------------------------

@dataclass
class DensityConfig:
    gmm_components: int = 5
    k: dict = field(default_factory=dict)  # FeatureKind -> k (default 1)
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 200

    def k_for(self, kind: FeatureKind) -> int:
        return int(self.k.get(kind, 1))


@dataclass
class FrameScores:
    frames: list          # frames_of(dataset, "test")
    kinds: tuple          # column order
    values: np.ndarray    # (n_frames, len(kinds)), all in [0, 1]


def _train_vectors(dataset: Dataset, kind: FeatureKind) -> np.ndarray:
    vecs = [rec.vector for video in dataset.train
            for rec in video.records.get(kind, [])]
    if not vecs:
        raise TooFewSamples(f"no training records for {kind.key}")
    return np.array(vecs, dtype=float)


def fit_density_models(dataset: Dataset, config: DensityConfig = None,
                       kinds=None) -> tuple:
    """Fit per-kind models and calibration stats on the train split."""
    config = config or DensityConfig()
    kinds = tuple(kinds) if kinds else tuple(k for k in KIND_ORDER
                                             if k in dataset.dims)
    models, calib = {}, {}
    for kind in kinds:
        train = _train_vectors(dataset, kind)
        if kind is FeatureKind.VELOCITY:
            model = fit_gmm(train, config.gmm_components, seed=config.seed,
                            tol=config.tol, max_iter=config.max_iter)
            raw = gmm_score_batch(model, train)
        else:
            model = KnnIndex(train, k=config.k_for(kind))
            raw = knn_train_scores(model)
        models[kind] = model
        calib[kind] = fit_calibration(raw)
    return models, calib


def _raw_scores(model, vectors: np.ndarray) -> np.ndarray:
    if isinstance(model, GmmModel):
        return gmm_score_batch(model, vectors)
    return knn_score_batch(model, vectors)


def score_dataset(dataset: Dataset, models: dict, calib: dict,
                  agg: str = "max") -> FrameScores:
    """Calibrated per-frame per-kind scores over the test split.

    Record scores covering a frame are aggregated raw (max or mean),
    then calibrated; frames with no covering record score 0.
    """
    if agg not in ("max", "mean"):
        raise ValueError(f"unknown aggregation {agg!r}")
    kinds = tuple(models)
    for kind in kinds:
        if kind not in calib:
            raise ModelKindMissing(f"no calibration for {kind.key}")
    frames = frames_of(dataset, "test")
    values = np.zeros((len(frames), len(kinds)))
    row = 0
    for video in dataset.test:
        n = video.frame_count
        for col, kind in enumerate(kinds):
            if kind not in models:
                raise ModelKindMissing(kind.key)
            records = video.records.get(kind, [])
            frame_raw = [[] for _ in range(n)]
            if records:
                raw = _raw_scores(models[kind],
                                  np.array([r.vector for r in records], dtype=float))
                for rec, score in zip(records, raw):
                    for f in range(rec.frame_index,
                                   rec.frame_index + rec.block_length):
                        frame_raw[f].append(score)
            for f in range(n):
                if not frame_raw[f]:
                    continue
                pooled = max(frame_raw[f]) if agg == "max" else \
                    float(np.mean(frame_raw[f]))
                values[row + f, col] = apply_calibration(calib[kind], pooled)
        row += n
    return FrameScores(frames, kinds, values)


# ---------------------------------------------------------------------------
# Model sidecar serialization (little-endian, like the .mff container)
# ---------------------------------------------------------------------------

MODELS_MAGIC = b"MFD1"


def save_models(path, models: dict, calib: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(MODELS_MAGIC)
        fh.write(struct.pack("<I", len(models)))
        for kind, model in models.items():
            stats = calib[kind]
            is_gmm = isinstance(model, GmmModel)
            fh.write(struct.pack("<BBdd", kind.value, 0 if is_gmm else 1,
                                 stats.train_min, stats.train_max))
            if is_gmm:
                k, d = model.means.shape
                fh.write(struct.pack("<II", k, d))
                fh.write(model.weights.astype("<f8").tobytes())
                fh.write(model.means.astype("<f8").tobytes())
                fh.write(model.covariances.astype("<f8").tobytes())
            else:
                n, d = model.vectors.shape
                fh.write(struct.pack("<IIQ", model.k, d, n))
                fh.write(model.vectors.astype("<f8").tobytes())


def load_models(path) -> tuple:
    data = Path(path).read_bytes()
    if data[:4] != MODELS_MAGIC:
        raise EmptyInput(f"{path}: bad model sidecar magic")
    (count,) = struct.unpack_from("<I", data, 4)
    offset = 8
    models, calib = {}, {}
    for _ in range(count):
        tag, mtype, lo, hi = struct.unpack_from("<BBdd", data, offset)
        offset += struct.calcsize("<BBdd")
        kind = FeatureKind(tag)
        calib[kind] = CalibrationStats(lo, hi)
        if mtype == 0:
            k, d = struct.unpack_from("<II", data, offset)
            offset += 8
            weights = np.frombuffer(data, "<f8", k, offset).copy()
            offset += 8 * k
            means = np.frombuffer(data, "<f8", k * d, offset).reshape(k, d).copy()
            offset += 8 * k * d
            covs = np.frombuffer(data, "<f8", k * d * d, offset).reshape(k, d, d).copy()
            offset += 8 * k * d * d
            models[kind] = GmmModel(weights, means, covs)
        else:
            k, d, n = struct.unpack_from("<IIQ", data, offset)
            offset += struct.calcsize("<IIQ")
            vecs = np.frombuffer(data, "<f8", n * d, offset).reshape(n, d).copy()
            offset += 8 * n * d
            models[kind] = KnnIndex(vecs, k=k)
    return models, calib

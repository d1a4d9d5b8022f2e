import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import vadkit as vk
from vadkit.containers import FeatureKind
from vadkit.density import (
    KnnIndex,
    gmm_score_batch,
    knn_score_batch,
    load_models,
    save_models,
)
from vadkit.errors import EmptyIndex, EmptyInput, TooFewSamples


# --- GMM ---

def test_single_gaussian_recovers_mle():
    rng = np.random.default_rng(0)
    x = rng.normal([1.0, -2.0], [0.5, 2.0], size=(10000, 2))
    model = vk.fit_gmm(x, n_components=1, seed=0)
    # closed-form MLE of a single Gaussian: sample mean / biased covariance
    assert np.all(np.abs(model.means[0] - x.mean(axis=0)) < 0.05)
    mle_cov = np.cov(x, rowvar=False, bias=True)
    assert np.all(np.abs(model.covariances[0] - mle_cov) / np.abs(mle_cov).max()
                  < 0.10)


def test_two_separated_clusters():
    rng = np.random.default_rng(1)
    a = rng.normal([0.0, 0.0], 0.5, size=(3000, 2))
    b = rng.normal([10.0, 10.0], 0.5, size=(1000, 2))
    x = np.vstack([a, b])
    model = vk.fit_gmm(x, n_components=2, seed=3)
    # nearest-mean assignment oracle: empirical cluster centers
    order = np.argsort(model.means[:, 0])
    means = model.means[order]
    weights = model.weights[order]
    assert np.all(np.abs(means[0] - a.mean(axis=0)) < 0.1)
    assert np.all(np.abs(means[1] - b.mean(axis=0)) < 0.1)
    assert abs(weights[0] - 0.75) < 0.05
    assert abs(weights[1] - 0.25) < 0.05


def test_em_loglik_nondecreasing_random_fits():
    rng = np.random.default_rng(2)
    for trial in range(10):
        n_comp = int(rng.integers(1, 5))
        x = rng.normal(rng.normal(0, 3, 2), rng.uniform(0.3, 2.0),
                       size=(int(rng.integers(50, 300)), 2))
        model = vk.fit_gmm(x, n_comp, seed=int(rng.integers(1 << 30)))
        trace = np.asarray(model.log_likelihood_trace)
        assert np.all(np.diff(trace) >= -1e-9)
        assert abs(model.weights.sum() - 1.0) < 1e-9
        for cov in model.covariances:
            assert np.linalg.det(cov) > 0
            assert cov[0, 0] > 0 and cov[1, 1] > 0


def test_degenerate_two_identical_points():
    x = np.array([[1.0, 2.0], [1.0, 2.0]])
    model = vk.fit_gmm(x, n_components=1, seed=0)
    assert np.allclose(model.means[0], [1.0, 2.0])
    assert model.covariances[0][0, 0] == pytest.approx(1e-6)
    assert model.covariances[0][1, 1] == pytest.approx(1e-6)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        vk.fit_gmm(np.zeros((2, 2)), n_components=3)


def test_gmm_score_at_mean_of_standard_gaussian():
    model = vk.GmmModel(weights=np.array([1.0]),
                        means=np.array([[0.0, 0.0]]),
                        covariances=np.array([np.eye(2)]))
    assert vk.gmm_score(model, [0.0, 0.0]) == pytest.approx(np.log(2 * np.pi),
                                                            abs=1e-12)


def test_gmm_score_increases_along_ray():
    model = vk.GmmModel(weights=np.array([1.0]),
                        means=np.array([[0.0, 0.0]]),
                        covariances=np.array([np.eye(2)]))
    scores = [vk.gmm_score(model, [t * 0.6, t * 0.8]) for t in range(10)]
    assert np.all(np.diff(scores) > 0)


def test_gmm_score_matches_direct_summation():
    rng = np.random.default_rng(5)
    k = 4
    weights = rng.dirichlet(np.ones(k))
    means = rng.normal(0, 2, (k, 2))
    covs = []
    for _ in range(k):
        a = rng.normal(0, 1, (2, 2))
        covs.append(a @ a.T + 0.3 * np.eye(2))
    model = vk.GmmModel(weights, means, np.array(covs))
    for _ in range(20):
        x = rng.normal(0, 3, 2)
        # direct mixture-density evaluation
        dens = 0.0
        for j in range(k):
            diff = x - means[j]
            inv = np.linalg.inv(covs[j])
            det = np.linalg.det(covs[j])
            dens += weights[j] * np.exp(-0.5 * diff @ inv @ diff) / \
                (2 * np.pi * np.sqrt(det))
        expected = -np.log(dens)
        assert vk.gmm_score(model, x) == pytest.approx(expected, rel=1e-10)


# --- kNN ---

def test_knn_stored_vector_scores_zero():
    idx = KnnIndex(np.array([[1.0, 2.0], [3.0, 4.0]]), k=1)
    assert vk.knn_score(idx, [1.0, 2.0]) == 0.0


def test_knn_pythagorean():
    idx = KnnIndex(np.array([[0.0, 0.0], [3.0, 4.0]]), k=2)
    assert vk.knn_score(idx, [0.0, 0.0]) == 5.0


def test_knn_matches_bruteforce_sort():
    rng = np.random.default_rng(7)
    stored = rng.normal(size=(1000, 16))
    queries = rng.normal(size=(100, 16))
    for k in (1, 3):
        idx = KnnIndex(stored, k=k)
        got = knn_score_batch(idx, queries)
        expected = np.array([
            np.sqrt(np.sort(np.array([np.sum((v - q) ** 2) for v in stored]))[k - 1])
            for q in queries])
        assert np.array_equal(got, expected)


def test_knn_empty_and_bad_k():
    with pytest.raises(EmptyIndex):
        KnnIndex(np.zeros((0, 3)))
    with pytest.raises(EmptyIndex):
        KnnIndex(np.zeros((2, 3)), k=3)


# --- calibration ---

def test_calibration_basic():
    stats = vk.fit_calibration([1.0, 2.0, 3.0])
    assert (stats.train_min, stats.train_max) == (1.0, 3.0)
    assert vk.apply_calibration(stats, 2.0) == 0.5
    assert vk.apply_calibration(stats, 10.0) == 1.0
    assert vk.apply_calibration(stats, -5.0) == 0.0
    assert vk.apply_calibration(stats, 1.0) == 0.0
    assert vk.apply_calibration(stats, 3.0) == 1.0


def test_calibration_degenerate_range():
    stats = vk.fit_calibration([5.0])
    assert (stats.train_min, stats.train_max) == (5.0, 5.0)
    assert vk.apply_calibration(stats, 5.0) == 0.0
    assert vk.apply_calibration(stats, 4.0) == 0.0
    assert vk.apply_calibration(stats, 6.0) == 1.0


def test_calibration_empty():
    with pytest.raises(EmptyInput):
        vk.fit_calibration([])


@settings(deadline=None, max_examples=50)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=20),
       st.floats(-1e6, 1e6), st.floats(0, 1e6))
def test_calibration_monotone(train, s1, delta):
    stats = vk.fit_calibration(train)
    assert vk.apply_calibration(stats, s1) <= vk.apply_calibration(stats,
                                                                   s1 + delta)


def test_calibration_bounds_train_scores():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(200, 2))
    model = vk.fit_gmm(x, 2, seed=0)
    raw = gmm_score_batch(model, x)
    stats = vk.fit_calibration(raw)
    assert stats.train_min == raw.min() and stats.train_max == raw.max()
    calibrated = vk.apply_calibration(stats, raw)
    assert calibrated.min() == 0.0 and calibrated.max() == 1.0


# --- dataset scoring ---

def test_frame_scores_in_unit_interval(tiny_scores):
    assert tiny_scores.values.min() >= 0.0
    assert tiny_scores.values.max() <= 1.0
    assert tiny_scores.values.shape[1] == 4


def test_anomalous_frames_score_higher(tiny_dataset, tiny_scores, tiny_labels):
    col = tiny_scores.kinds.index(FeatureKind.VIDEO_ENCODING)
    ve = tiny_scores.values[:, col]
    assert ve[tiny_labels == 1].mean() > ve[tiny_labels == 0].mean()


def test_scoring_deterministic(tiny_dataset):
    models, calib = vk.fit_density_models(tiny_dataset)
    a = vk.score_dataset(tiny_dataset, models, calib)
    b = vk.score_dataset(tiny_dataset, models, calib)
    assert np.array_equal(a.values, b.values)


def test_aggregation_max_vs_mean(tiny_dataset):
    models, calib = vk.fit_density_models(tiny_dataset)
    mx = vk.score_dataset(tiny_dataset, models, calib, agg="max")
    mn = vk.score_dataset(tiny_dataset, models, calib, agg="mean")
    assert np.all(mx.values >= mn.values - 1e-12)


def test_empty_frame_scores_zero():
    # video-encoding blocks cover only the first 16 of 20 frames
    rng = np.random.default_rng(3)
    kind = FeatureKind.VIDEO_ENCODING
    train = vk.VideoFeatureSet("tr", 20, {
        kind: [vk.FeatureRecord(0, rng.normal(size=4).astype(np.float32), 16)]})
    test = vk.VideoFeatureSet("te", 20, {
        kind: [vk.FeatureRecord(0, rng.normal(size=4).astype(np.float32), 16)]},
        ground_truth=np.zeros(20, dtype=np.uint8))
    ds = vk.Dataset("d", [train], [test], {kind: 4})
    models, calib = vk.fit_density_models(ds)
    scores = vk.score_dataset(ds, models, calib)
    assert np.all(scores.values[16:, 0] == 0.0)


def test_model_sidecar_roundtrip(tmp_path, tiny_dataset):
    models, calib = vk.fit_density_models(tiny_dataset)
    path = tmp_path / "models.bin"
    save_models(path, models, calib)
    models2, calib2 = load_models(path)
    a = vk.score_dataset(tiny_dataset, models, calib)
    b = vk.score_dataset(tiny_dataset, models2, calib2)
    assert np.array_equal(a.values, b.values)

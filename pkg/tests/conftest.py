import numpy as np
import pytest

import vadkit as vk


@pytest.fixture(scope="session")
def tiny_dataset():
    cfg = vk.default_config(shift_scale=10.0, seed=11,
                            n_train_videos=2, n_test_videos=2,
                            frames_per_video=64)
    return vk.generate(cfg)


@pytest.fixture(scope="session")
def tiny_scores(tiny_dataset):
    models, calib = vk.fit_density_models(tiny_dataset)
    return vk.score_dataset(tiny_dataset, models, calib)


@pytest.fixture(scope="session")
def tiny_labels(tiny_dataset):
    return np.concatenate([v.ground_truth for v in tiny_dataset.test])

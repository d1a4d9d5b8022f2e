"""Feature-subset ablation on synthetic data.

Shows how much each feature kind contributes by evaluating the
unsupervised baseline on fixed subsets of the score columns.
"""

import json
import tempfile
from pathlib import Path

import vadkit as vk
from vadkit.harness import ExperimentConfig


def main():
    dims = {"pose": 6, "velocity": 2, "image_encoding": 6,
            "video_encoding": 6}
    config = ExperimentConfig.from_json({
        "synth": {
            "n_train_videos": 3, "n_test_videos": 3,
            "frames_per_video": 96, "dims": dims,
            "normal_mixture": {k: [[1.0, [0.0] * d, [1.0] * d]]
                               for k, d in dims.items()},
            # signal only in velocity and video encoding
            "anomaly_shift": {"pose": [0.0] * 6, "velocity": [6.0] * 2,
                              "image_encoding": [0.0] * 6,
                              "video_encoding": [6.0] * 6},
            "anomaly_segments": [[[20, 40]], [[48, 64]], [[10, 30]]],
            "seed": 5,
        },
        "fusion": {"alpha": 0.0, "n_trials": 1},
        "output_dir": str(Path(tempfile.mkdtemp()) / "out"),
    })
    rows = vk.run_feature_ablation(config)
    print(f"{'subset':<16} AUC")
    for name, auc in rows:
        print(f"{name:<16} {auc:.4f}")


if __name__ == "__main__":
    main()

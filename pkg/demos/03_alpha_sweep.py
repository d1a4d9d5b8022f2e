"""Sweep the supervised-sample fraction alpha.

Reproduces the protocol-level observation that results change little
across small alpha values, with and without the appended max column.
"""

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
            "anomaly_shift": {k: [6.0] * d for k, d in dims.items()},
            "anomaly_segments": [[[20, 40]], [[48, 64]], [[10, 30]]],
            "seed": 9,
        },
        "fusion": {"alpha": 0.05, "n_trials": 10},
        "output_dir": str(Path(tempfile.mkdtemp()) / "out"),
    })
    rows = vk.run_alpha_sweep(config, alphas=(0.0, 0.02, 0.05, 0.10, 0.20))
    print(f"{'alpha':>6} {'max?':>5} {'mean':>8} {'std':>8}")
    for alpha, with_max, mean, std in rows:
        print(f"{alpha:>6.2f} {str(with_max):>5} {mean:>8.4f} {std:>8.4f}")


if __name__ == "__main__":
    main()

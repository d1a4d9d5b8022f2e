"""Render a per-video anomaly-score timeline as an SVG file.

Runs a tiny experiment, then plots the smoothed fused score of the
first test video against its labeled anomaly segments.
"""

import sys
import tempfile
from pathlib import Path

import vadkit as vk
from vadkit.harness import ExperimentConfig
from vadkit.plotting import render_timeline_csv


def main():
    out_dir = Path(tempfile.mkdtemp()) / "out"
    dims = {"pose": 4, "velocity": 2, "image_encoding": 4,
            "video_encoding": 4}
    config = ExperimentConfig.from_json({
        "synth": {
            "n_train_videos": 2, "n_test_videos": 2,
            "frames_per_video": 96, "dims": dims,
            "normal_mixture": {k: [[1.0, [0.0] * d, [1.0] * d]]
                               for k, d in dims.items()},
            "anomaly_shift": {k: [7.0] * d for k, d in dims.items()},
            "anomaly_segments": [[[24, 48]], [[56, 80]]],
            "seed": 3,
        },
        "fusion": {"alpha": 0.05, "n_trials": 5},
        "output_dir": str(out_dir),
    })
    vk.run_experiment(config)

    timeline = out_dir / "timelines" / "test_000.csv"
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("timeline.svg")
    render_timeline_csv(timeline, target)
    print(f"wrote {target} (from {timeline})")


if __name__ == "__main__":
    main()

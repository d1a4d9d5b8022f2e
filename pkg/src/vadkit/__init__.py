"""Frame-level video anomaly scoring from precomputed features.

Pipeline: per-kind density models fitted on normal training data, min-max
score calibration, per-frame max aggregation, logistic-regression fusion
over a sampled fraction of test frames, Gaussian temporal smoothing, and
exact frame-level ROC-AUC with repeated-trial aggregation.
"""

from .containers import (
    Dataset,
    FeatureKind,
    FeatureRecord,
    VideoFeatureSet,
    frames_of,
    load_dataset,
    save_dataset,
    video_boundaries,
)
from .density import (
    CalibrationStats,
    DensityConfig,
    FrameScores,
    GmmModel,
    KnnIndex,
    apply_calibration,
    fit_calibration,
    fit_density_models,
    fit_gmm,
    gmm_score,
    knn_score,
    score_dataset,
)
from .fusion import (
    FusionModel,
    LogRegHyper,
    ScoreMatrix,
    SplitSample,
    build_matrix,
    fuse_unsupervised,
    predict,
    sample_split,
    train_logreg,
)
from .harness import (
    ExperimentConfig,
    run_alpha_sweep,
    run_experiment,
    run_feature_ablation,
)
from .manifest import (
    Manifest,
    SplitSpec,
    audit_manifest,
    build_manifest,
    hmdb_ad_spec,
    hmdb_violence_spec,
)
from .postprocess import (
    EvalReport,
    SmoothingConfig,
    gaussian_smooth,
    roc_auc,
    run_trials,
)
from .synth import SynthConfig, default_config, generate

__version__ = "0.1.0"

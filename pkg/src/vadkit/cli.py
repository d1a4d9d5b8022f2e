"""Command-line front end for the scoring pipeline and experiment harness."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import harness, synth as synth_mod
from .containers import load_dataset, save_dataset, video_boundaries
from .density import load_models, save_models, fit_density_models, score_dataset
from .errors import VadkitError
from .fusion import build_matrix
from .harness import ExperimentConfig
from .manifest import BUILTIN_SPECS, Manifest, audit_manifest, build_manifest
from .plotting import render_timeline_csv


def _fail(stage: str, err: Exception):
    click.echo(f"error [{stage}]: {err}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Frame-level video anomaly scoring pipeline."""


@main.command("synth")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="SynthConfig JSON; omit for the built-in separable config.")
@click.option("--seed", type=int, default=None, help="Override the seed.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth_cmd(config_path, seed, out_dir):
    """Generate a synthetic dataset and save it as a container directory."""
    try:
        if config_path:
            cfg = synth_mod.SynthConfig.from_json_file(config_path)
            if seed is not None:
                cfg.seed = seed
        else:
            cfg = synth_mod.default_config(seed=seed or 0)
        save_dataset(synth_mod.generate(cfg), out_dir)
    except VadkitError as err:
        _fail("synth", err)
    click.echo(f"wrote dataset to {out_dir}")


@main.command("fit")
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--gmm-components", type=int, default=5)
@click.option("--seed", type=int, default=0)
def fit_cmd(dataset_path, out_path, gmm_components, seed):
    """Fit per-kind density models and calibration; save the sidecar."""
    try:
        dataset = load_dataset(dataset_path)
        from .density import DensityConfig
        models, calib = fit_density_models(
            dataset, DensityConfig(gmm_components=gmm_components, seed=seed))
        save_models(out_path, models, calib)
    except VadkitError as err:
        _fail("fit", err)
    click.echo(f"wrote models to {out_path}")


@main.command("score")
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True))
@click.option("--models", "models_path", required=True,
              type=click.Path(exists=True))
@click.option("--agg", type=click.Choice(["max", "mean"]), default="max")
@click.option("--include-max/--no-include-max", default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def score_cmd(dataset_path, models_path, agg, include_max, out_path):
    """Score the test split and write the score matrix as CSV."""
    try:
        dataset = load_dataset(dataset_path)
        models, calib = load_models(models_path)
        scores = score_dataset(dataset, models, calib, agg=agg)
        X = build_matrix(scores, include_max=include_max)
        with open(out_path, "w") as fh:
            header = [k.short for k in X.kinds] + (["max"] if X.has_max else [])
            fh.write("video,frame," + ",".join(header) + "\n")
            for (vid, frame), row in zip(scores.frames, X.values):
                fh.write(f"{vid},{frame}," +
                         ",".join(f"{v:.10f}" for v in row) + "\n")
    except VadkitError as err:
        _fail("score", err)
    click.echo(f"wrote scores to {out_path}")


def _load_config(config_path, seed):
    cfg = ExperimentConfig.from_json_file(config_path)
    if seed is not None:
        cfg.base_seed = seed
        cfg.logreg.seed = seed
    return cfg


@main.command("eval")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
def eval_cmd(config_path, seed):
    """Run the full fit-score-fuse-evaluate pipeline per the config."""
    try:
        cfg = _load_config(config_path, seed)
        report = harness.run_experiment(cfg)
    except VadkitError as err:
        _fail("eval", err)
    click.echo(f"mean AUC {report.mean_auc:.4f} +/- {report.std_auc:.4f} "
               f"({report.n_trials} trials, {report.failures} failed)")


@main.command("ablate-features")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_csv", required=True, type=click.Path())
@click.option("--workers", type=int, default=1)
def ablate_cmd(config_path, out_csv, workers):
    """Feature-subset ablation at alpha = 0."""
    try:
        cfg = ExperimentConfig.from_json_file(config_path)
        rows = harness.run_feature_ablation(cfg, out_csv=out_csv,
                                            workers=workers)
    except VadkitError as err:
        _fail("ablate-features", err)
    for name, auc in rows:
        click.echo(f"{name:<16s} {auc:.4f}")


@main.command("sweep-alpha")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--alphas", default=None,
              help="Comma-separated list, e.g. 0,0.01,0.02")
@click.option("--out", "out_csv", required=True, type=click.Path())
@click.option("--workers", type=int, default=1)
def sweep_cmd(config_path, alphas, out_csv, workers):
    """Fusion training-fraction sweep, with and without the max column."""
    try:
        cfg = ExperimentConfig.from_json_file(config_path)
        alpha_list = (harness.DEFAULT_ALPHAS if alphas is None
                      else tuple(float(a) for a in alphas.split(",")))
        rows = harness.run_alpha_sweep(cfg, alphas=alpha_list,
                                       out_csv=out_csv, workers=workers)
    except VadkitError as err:
        _fail("sweep-alpha", err)
    for a, with_max, mean, std in rows:
        tag = "+max" if with_max else "    "
        click.echo(f"alpha={a:<5g} {tag} {mean:.4f} +/- {std:.4f}")


@main.group("manifest")
def manifest_group():
    """Build and audit benchmark split manifests."""


@manifest_group.command("build")
@click.option("--dataset", "dataset_name", required=True,
              type=click.Choice(sorted(BUILTIN_SPECS)))
@click.option("--root", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
def manifest_build_cmd(dataset_name, root, seed, out_path):
    try:
        spec = BUILTIN_SPECS[dataset_name](seed=seed)
        manifest = build_manifest(root, spec)
        manifest.save_jsonl(out_path)
    except VadkitError as err:
        _fail("manifest build", err)
    click.echo(f"wrote {len(manifest.entries)} entries to {out_path}")


@manifest_group.command("audit")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--dataset", "dataset_name", required=True,
              type=click.Choice(sorted(BUILTIN_SPECS)))
@click.option("--frame-counts", "frame_counts_csv", default=None,
              type=click.Path(exists=True),
              help="CSV with columns path,frames")
@click.option("--out", "out_path", default=None, type=click.Path())
def manifest_audit_cmd(manifest_path, dataset_name, frame_counts_csv, out_path):
    try:
        spec = BUILTIN_SPECS[dataset_name]()
        manifest = Manifest.load_jsonl(manifest_path, dataset=dataset_name)
        frame_counts = None
        if frame_counts_csv:
            import csv as _csv
            with open(frame_counts_csv) as fh:
                frame_counts = {row["path"]: int(row["frames"])
                                for row in _csv.DictReader(fh)}
        report = audit_manifest(manifest, spec, frame_counts=frame_counts)
    except VadkitError as err:
        _fail("manifest audit", err)
    text = json.dumps(report, indent=2)
    if out_path:
        Path(out_path).write_text(text)
    click.echo(text)
    if report["violations"]:
        sys.exit(1)


@main.command("plot")
@click.option("--timeline", "timeline_csv", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def plot_cmd(timeline_csv, out_path):
    """Render a timeline CSV as a basic SVG line chart."""
    try:
        render_timeline_csv(timeline_csv, out_path)
    except (VadkitError, ValueError, KeyError) as err:
        _fail("plot", err)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()

import json

import numpy as np
import pytest
from click.testing import CliRunner

import vadkit as vk
from mffextract import ExtractionConfig, InvalidConfig, extract
from mffextract.cli import main


def make_clip(n_frames, moving=True, static=True, size=64):
    clip = np.zeros((n_frames, size, size), dtype=np.float32)
    for t in range(n_frames):
        if static:
            clip[t, 10:20, 10:20] = 200.0
        if moving:
            x = 30 + t
            clip[t, 40:50, x:x + 10] = 180.0
    return clip


def write_clip(tmp_path, name, clip):
    path = tmp_path / f"{name}.npy"
    np.save(path, clip)
    return str(path)


def config_for(tmp_path, videos, **kw):
    obj = {"videos": videos,
           "models": {"detector": "intensity-thresh"}}
    obj.update(kw)
    return ExtractionConfig.from_json(obj, output_root=str(tmp_path / "out"))


def test_containers_pass_primary_validation(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(33)),
              write_clip(tmp_path, "b", make_clip(20))]
    summary = extract(config_for(tmp_path, videos))
    assert summary["succeeded"] == 2 and summary["failed"] == []
    ds = vk.load_dataset(tmp_path / "out")  # validates on load
    assert [v.video_id for v in ds.train] == ["a", "b"]
    assert ds.dims[vk.FeatureKind.VELOCITY] == 2
    assert ds.dims[vk.FeatureKind.POSE] == summary["dims"]["pose"]


def test_33_frames_yield_two_video_blocks(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(33))]
    extract(config_for(tmp_path, videos))
    ds = vk.load_dataset(tmp_path / "out")
    blocks = ds.train[0].records[vk.FeatureKind.VIDEO_ENCODING]
    assert len(blocks) == 2
    assert [b.frame_index for b in blocks] == [0, 16]
    assert all(b.block_length == 16 for b in blocks)


def test_static_object_velocity_below_half_pixel(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(24, moving=False))]
    extract(config_for(tmp_path, videos))
    ds = vk.load_dataset(tmp_path / "out")
    vels = ds.train[0].records[vk.FeatureKind.VELOCITY]
    assert len(vels) == 24
    mags = [float(np.linalg.norm(r.vector)) for r in vels]
    assert max(mags) < 0.5


def test_two_frame_static_clip(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(2, moving=False))]
    extract(config_for(tmp_path, videos))
    ds = vk.load_dataset(tmp_path / "out")
    for rec in ds.train[0].records[vk.FeatureKind.VELOCITY]:
        assert np.allclose(rec.vector, 0.0, atol=0.2)


def test_moving_object_velocity_tracks_motion(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(24, static=False))]
    extract(config_for(tmp_path, videos))
    ds = vk.load_dataset(tmp_path / "out")
    vels = ds.train[0].records[vk.FeatureKind.VELOCITY][1:]  # skip frame 0
    dx = np.mean([r.vector[0] for r in vels])
    assert 0.5 < dx < 1.5  # object moves +1 px/frame horizontally


def test_failed_clip_skipped(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(20)),
              str(tmp_path / "missing.npy")]
    summary = extract(config_for(tmp_path, videos))
    assert summary["succeeded"] == 1
    assert summary["failed"] == [str(tmp_path / "missing.npy")]
    ds = vk.load_dataset(tmp_path / "out")
    assert [v.video_id for v in ds.train] == ["a"]


def test_deterministic_outputs(tmp_path):
    clip = make_clip(33)
    payloads = []
    for name in ("r1", "r2"):
        videos = [write_clip(tmp_path, "a", clip)]
        cfg = config_for(tmp_path, videos, output_root=str(tmp_path / name))
        extract(cfg)
        files = sorted((tmp_path / name).rglob("*.mff"))
        payloads.append([f.read_bytes() for f in files])
    assert payloads[0] == payloads[1]


def test_workers_match_serial(tmp_path):
    videos = [write_clip(tmp_path, f"v{i}", make_clip(20 + i))
              for i in range(3)]
    extract(config_for(tmp_path, videos, output_root=str(tmp_path / "s")))
    extract(config_for(tmp_path, videos, output_root=str(tmp_path / "p"),
                       workers=3))
    for f in sorted((tmp_path / "s").rglob("*.mff")):
        twin = tmp_path / "p" / f.relative_to(tmp_path / "s")
        assert f.read_bytes() == twin.read_bytes()


def test_manifest_input(tmp_path):
    path = write_clip(tmp_path, "a", make_clip(20))
    manifest = tmp_path / "clips.jsonl"
    manifest.write_text(json.dumps({"path": path}) + "\n")
    cfg = ExtractionConfig.from_json(
        {"manifest": str(manifest),
         "models": {"detector": "intensity-thresh"}},
        output_root=str(tmp_path / "out"))
    assert extract(cfg)["succeeded"] == 1


def test_config_rejections(tmp_path):
    with pytest.raises(InvalidConfig, match="unknown config keys"):
        ExtractionConfig.from_json({"videos": ["x"], "gpu": True},
                                   output_root="o")
    with pytest.raises(InvalidConfig):
        ExtractionConfig.from_json({"videos": []}, output_root="o").validate()
    with pytest.raises(InvalidConfig):
        ExtractionConfig.from_json({"videos": ["x"], "block_length": 0},
                                   output_root="o").validate()


def test_cli_extract(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(33))]
    cfg_path = tmp_path / "extract.json"
    cfg_path.write_text(json.dumps(
        {"videos": videos, "models": {"detector": "intensity-thresh"}}))
    runner = CliRunner()
    result = runner.invoke(main, ["extract", "--config", str(cfg_path),
                                  "--out", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["succeeded"] == 1
    assert vk.load_dataset(tmp_path / "out").train[0].frame_count == 33


def test_cli_nonzero_exit_on_partial_failure(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(20)),
              str(tmp_path / "missing.npy")]
    cfg_path = tmp_path / "extract.json"
    cfg_path.write_text(json.dumps(
        {"videos": videos, "models": {"detector": "intensity-thresh"}}))
    runner = CliRunner()
    result = runner.invoke(main, ["extract", "--config", str(cfg_path),
                                  "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert json.loads(result.output)["failed"]


def test_cli_unknown_model_is_stage_tagged(tmp_path):
    videos = [write_clip(tmp_path, "a", make_clip(8))]
    cfg_path = tmp_path / "extract.json"
    cfg_path.write_text(json.dumps(
        {"videos": videos, "models": {"detector": "resnet-900"}}))
    runner = CliRunner()
    result = runner.invoke(main, ["extract", "--config", str(cfg_path),
                                  "--out", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert "error [extract]" in result.output

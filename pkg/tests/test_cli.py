"""End-to-end CLI tests: pipelines, determinism, exit codes."""

import csv
import json

import numpy as np
import pytest

from rayfield.cli import main
from rayfield.sceneio import (import_dataset, load_scene, save_predictions,
                              save_scene, scene_hash)

from helpers import lit_box_scene, three_cuboid_scene


def write_scene(tmp_path, scene, name="scene.json"):
    path = tmp_path / name
    save_scene(scene, path)
    return path


def dir_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture()
def lit_scene_path(tmp_path):
    # area light so the seed actually matters
    scene = lit_box_scene(height=12, width=12, reflective=True)
    scene.lights[0] = type(scene.lights[0])(position=(2.0, 3.0, 0.0),
                                            intensity=1.0, radius=0.5)
    return write_scene(tmp_path, scene)


def test_synthesize_produces_dataset_and_images(lit_scene_path, tmp_path):
    out = tmp_path / "out"
    assert main(["synthesize", "--scene", str(lit_scene_path),
                 "--out", str(out), "--seed", "5"]) == 0
    assert (out / "dataset" / "manifest.json").exists()
    assert (out / "view_000.png").exists()
    assert (out / "view_000.f32").exists()
    field = import_dataset(out / "dataset")
    assert field.n_pts > 0
    assert field.scene_hash == scene_hash(load_scene(lit_scene_path))


def test_synthesize_deterministic_bytes(lit_scene_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["synthesize", "--scene", str(lit_scene_path), "--out", str(a),
                 "--seed", "9"]) == 0
    assert main(["synthesize", "--scene", str(lit_scene_path), "--out", str(b),
                 "--seed", "9"]) == 0
    assert dir_bytes(a) == dir_bytes(b)

    c = tmp_path / "c"
    assert main(["synthesize", "--scene", str(lit_scene_path), "--out", str(c),
                 "--seed", "10"]) == 0
    assert dir_bytes(a) != dir_bytes(c)


def test_render_matches_synthesize_output(lit_scene_path, tmp_path):
    out = tmp_path / "out"
    main(["synthesize", "--scene", str(lit_scene_path), "--out", str(out)])
    rendered = tmp_path / "re"
    assert main(["render", "--dataset", str(out / "dataset"), "--view", "0",
                 "--out", str(rendered)]) == 0
    assert (rendered / "view_000.png").read_bytes() == \
        (out / "view_000.png").read_bytes()
    assert (rendered / "view_000.f32").read_bytes() == \
        (out / "view_000.f32").read_bytes()


def test_evaluate_ground_truth_passthrough(lit_scene_path, tmp_path, capsys):
    out = tmp_path / "out"
    main(["synthesize", "--scene", str(lit_scene_path), "--out", str(out)])
    field = import_dataset(out / "dataset")
    save_predictions(field.sample_colour, np.arange(field.n_pts), "colour",
                     field.scene_hash, tmp_path / "pred")
    metrics_out = tmp_path / "metrics"
    assert main(["evaluate", "--dataset", str(out / "dataset"),
                 "--predictions", str(tmp_path / "pred"),
                 "--metrics", "wape,psnr,ssim", "--out", str(metrics_out)]) == 0
    printed = capsys.readouterr().out

    with (metrics_out / "metrics.csv").open() as f:
        rows = {(r["metric"], r["view"]): r["value"] for r in csv.DictReader(f)}
    assert float(rows[("wape_colour", "mean")]) == 0.0
    assert float(rows[("psnr", "mean")]) == 99.0  # sentinel capped
    assert float(rows[("ssim", "mean")]) == 1.0
    # printed table and CSV carry identical formatted values
    for (metric, view), value in rows.items():
        assert value in printed


def test_evaluate_offset_density_exact_wape(lit_scene_path, tmp_path, capsys):
    out = tmp_path / "out"
    main(["synthesize", "--scene", str(lit_scene_path), "--out", str(out)])
    field = import_dataset(out / "dataset")
    save_predictions(field.sample_density + 0.125, np.arange(field.n_pts),
                     "density", field.scene_hash, tmp_path / "pred")
    assert main(["evaluate", "--dataset", str(out / "dataset"),
                 "--predictions", str(tmp_path / "pred")]) == 0
    assert "mean=0.125" in capsys.readouterr().out


def test_evaluate_depth_psnr(tmp_path, capsys):
    scene_path = write_scene(tmp_path, three_cuboid_scene(height=16, width=16))
    out = tmp_path / "out"
    main(["synthesize", "--scene", str(scene_path), "--out", str(out)])
    field = import_dataset(out / "dataset")
    save_predictions(field.sample_t + 1.0, np.arange(field.n_pts), "depth",
                     field.scene_hash, tmp_path / "pred")
    assert main(["evaluate", "--dataset", str(out / "dataset"),
                 "--predictions", str(tmp_path / "pred"),
                 "--metrics", "wape,psnr"]) == 0
    printed = capsys.readouterr().out
    assert "depth_psnr: mean=40" in printed
    assert "wape_depth: mean=1 " in printed or "wape_depth: mean=1\n" in printed


def test_complexity_command_reports_discrepancy(tmp_path, capsys):
    from rayfield.scene import ShaderSpec
    scene = three_cuboid_scene(height=10, width=10, extra_novel=True)
    scene.shaders.extend([
        ShaderSpec(kind="diffuse", light_samples=25, colour_range=255.0,
                   label="diffuse"),
        ShaderSpec(kind="diffuse", light_samples=25, colour_range=255.0,
                   label="glass", targets="glass"),
        ShaderSpec(kind="reflection", light_samples=1, trace_order=2,
                   colour_range=2.0, label="reflection"),
    ])
    scene_path = write_scene(tmp_path, scene)
    out = tmp_path / "cx"
    assert main(["complexity", "--scene", str(scene_path), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "306.196" in printed and "54.0" in printed and "WARNING" in printed

    with (out / "complexity.csv").open() as f:
        rows = {r["key"]: r["value"] for r in csv.DictReader(f)}
    assert rows["reference_mismatch"] == "true"
    assert float(rows["shader_complexity_literal"]) == pytest.approx(306.196, abs=1e-3)
    assert float(rows["shader_complexity_reference"]) == 54.0


def test_complexity_split_fraction_near_zero(tmp_path, capsys):
    from rayfield.scene import ShaderSpec
    scene = three_cuboid_scene(height=10, width=10, extra_novel=True)
    scene.shaders.append(ShaderSpec(kind="diffuse", light_samples=25,
                                    colour_range=255.0))
    scene_path = write_scene(tmp_path, scene)
    assert main(["complexity", "--scene", str(scene_path),
                 "--split-fraction", "0.8"]) == 0
    within = capsys.readouterr().out
    assert main(["complexity", "--scene", str(scene_path)]) == 0
    across = capsys.readouterr().out

    def task_value(text):
        for line in text.splitlines():
            if line.startswith("task complexity:"):
                return float(line.split(":")[1])
        raise AssertionError("no task complexity line")

    assert task_value(within) < 1e-6 * task_value(across)


def test_exit_code_validation_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"format\": \"rayfield-scene\", \"version\": 99}")
    assert main(["synthesize", "--scene", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_exit_code_io_error(tmp_path):
    assert main(["synthesize", "--scene", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == 3


def test_exit_code_bad_metric(lit_scene_path, tmp_path):
    out = tmp_path / "out"
    main(["synthesize", "--scene", str(lit_scene_path), "--out", str(out)])
    field = import_dataset(out / "dataset")
    save_predictions(field.sample_density, np.arange(field.n_pts), "density",
                     field.scene_hash, tmp_path / "pred")
    assert main(["evaluate", "--dataset", str(out / "dataset"),
                 "--predictions", str(tmp_path / "pred"),
                 "--metrics", "wape,nope"]) == 2


def test_out_root_env_var(lit_scene_path, tmp_path, monkeypatch):
    root = tmp_path / "root"
    root.mkdir()
    monkeypatch.setenv("RAYFIELD_OUT_ROOT", str(root))
    assert main(["synthesize", "--scene", str(lit_scene_path)]) == 0
    assert (root / "scene-synthesize" / "dataset" / "manifest.json").exists()


def test_hit_mode_override(tmp_path):
    scene = three_cuboid_scene(height=8, width=8, hit_mode="all")
    scene_path = write_scene(tmp_path, scene)
    main(["synthesize", "--scene", str(scene_path), "--out", str(tmp_path / "a")])
    main(["synthesize", "--scene", str(scene_path), "--out", str(tmp_path / "b"),
          "--hit-mode", "earliest"])
    full = import_dataset(tmp_path / "a" / "dataset")
    first = import_dataset(tmp_path / "b" / "dataset")
    assert first.n_pts == 3 * 8 * 8
    assert first.n_pts <= full.n_pts
    assert first.config.hit_mode == "earliest"

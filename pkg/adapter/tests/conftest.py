"""Fixtures: synthesize a dataset through the ground-truth CLI once."""

import json
import math
import subprocess
import sys

import pytest


def rot_y_pose(angle, tx, ty, tz):
    c, s = math.cos(angle), math.sin(angle)
    return [[c, 0.0, s, tx],
            [0.0, 1.0, 0.0, ty],
            [-s, 0.0, c, tz],
            [0.0, 0.0, 0.0, 1.0]]


SCENE = {
    "format": "rayfield-scene",
    "version": 1,
    "materials": {
        "white": {"albedo": [1.0, 1.0, 1.0]},
        "red": {"albedo": [1.0, 0.0, 0.0]},
        "glass": {"albedo": [0.2, 0.2, 0.9], "density": 0.5, "glass": True,
                  "reflectance": 0.6},
    },
    "glass_intensity_scale": 0.5,
    "lights": [{"position": [2.0, 3.0, 0.0], "intensity": 1.0, "radius": 0.4}],
    "shaders": [
        {"kind": "diffuse", "light_samples": 4, "label": "diffuse"},
        {"kind": "reflection", "light_samples": 1, "trace_order": 2,
         "colour_range": 2.0, "label": "reflection"},
    ],
    "synth": {"t_max": 100.0, "delta": 0.001, "hit_mode": "all",
              "empty_space": "far-bound-sample", "background": [0.0, 0.0, 0.0],
              "quantize_bits": 0},
    "surfaces": [
        {"type": "rect", "corner": [-3.0, -3.0, -9.0], "edge_u": [6.0, 0.0, 0.0],
         "edge_v": [0.0, 6.0, 0.0], "material": "red"},
        {"type": "triangle", "material": "white",
         "vertices": [[-1.5, -1.0, -4.0], [1.5, -1.0, -4.0], [0.0, 1.2, -4.5]]},
        {"type": "rect", "corner": [-1.0, -2.0, -3.0], "edge_u": [2.0, 0.0, 0.0],
         "edge_v": [0.0, 1.4, -1.4], "material": "glass"},
    ],
    "cameras": [
        {"pose": rot_y_pose(0.0, 0.0, 0.0, 0.0), "fov_deg": 55.0,
         "resolution": [10, 10], "role": "train"},
        {"pose": rot_y_pose(0.15, 0.5, 0.2, 0.5), "fov_deg": 55.0,
         "resolution": [10, 10], "role": "train"},
    ],
}


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "rayfield.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    scene_path = root / "scene.json"
    scene_path.write_text(json.dumps(SCENE, indent=2))
    out = root / "out"
    result = run_cli("synthesize", "--scene", str(scene_path),
                     "--out", str(out), "--seed", "3")
    assert result.returncode == 0, result.stderr
    return out / "dataset"

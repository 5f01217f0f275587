"""Reading ground-truth dataset bundles into training pipelines.

A bundle is a directory holding manifest.json plus raw little-endian
arrays.  This module parses and verifies the layout independently (content
hashes, shapes, dtypes) and exposes the arrays, per-view iteration, and
camera-pose conversions for common neural-rendering training setups.

Read-only after load; safe to share across data-loader workers.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DATASET_FORMAT = "rayfield-dataset"
SUPPORTED_VERSION = 1

RAY_ARRAYS = ("rays_id", "rays_origin", "rays_direction", "rays_view")
SAMPLE_ARRAYS = ("sample_view", "sample_ray", "sample_surface", "sample_t",
                 "sample_delta_prime", "sample_position", "sample_direction",
                 "sample_colour", "sample_density", "sample_is_empty")


class BundleError(ValueError):
    """Bundle is missing, inconsistent, or corrupted."""


@dataclass(frozen=True)
class ViewSlice:
    """One view's rays and samples."""

    view_id: int
    height: int
    width: int
    fov_deg: float
    role: str
    pose: np.ndarray           # 4x4 world-from-camera
    ray_origins: np.ndarray
    ray_directions: np.ndarray
    sample_index: np.ndarray   # indices into the bundle's sample arrays


class LoadedBundle:
    """Verified dataset bundle with flat float32/uint32 arrays."""

    def __init__(self, manifest: dict, arrays: dict[str, np.ndarray]):
        self.manifest = manifest
        self.arrays = arrays
        self.scene_hash = manifest.get("scene_hash")
        self.views = manifest["views"]

    @property
    def n_pts(self) -> int:
        return int(self.manifest["n_pts"])

    @property
    def ray_count(self) -> int:
        return int(self.manifest["ray_count"])

    def __getattr__(self, name):
        if name in self.arrays:
            return self.arrays[name]
        raise AttributeError(name)

    def view_pose(self, view_id: int) -> np.ndarray:
        for v in self.views:
            if v["view_id"] == view_id:
                return np.array(v["pose"], dtype=np.float64)
        raise KeyError(f"view {view_id} not in bundle")

    def iter_views(self):
        for v in self.views:
            lo, n = v["ray_offset"], v["ray_count"]
            mask = self.arrays["sample_view"] == v["view_id"]
            yield ViewSlice(view_id=v["view_id"], height=v["height"],
                            width=v["width"], fov_deg=v["fov_deg"],
                            role=v.get("role", "train"),
                            pose=np.array(v["pose"], dtype=np.float64),
                            ray_origins=self.arrays["rays_origin"][lo:lo + n],
                            ray_directions=self.arrays["rays_direction"][lo:lo + n],
                            sample_index=np.nonzero(mask)[0])


def load_bundle(path) -> LoadedBundle:
    """Parse and verify a dataset bundle directory."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise BundleError(f"{path}: no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("format") != DATASET_FORMAT:
        raise BundleError(f"{path}: not a {DATASET_FORMAT} bundle")
    if manifest.get("version") != SUPPORTED_VERSION:
        raise BundleError(f"{path}: unsupported version {manifest.get('version')!r}")
    if manifest.get("endianness") != "little":
        raise BundleError(f"{path}: unexpected endianness")

    arrays = {}
    for name, entry in manifest["arrays"].items():
        raw = (path / entry["file"]).read_bytes()
        if hashlib.sha256(raw).hexdigest() != entry["sha256"]:
            raise BundleError(f"{path}/{entry['file']}: content hash mismatch")
        arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"]))
        if arr.size != int(np.prod(entry["shape"])):
            raise BundleError(f"{path}/{entry['file']}: size does not match shape")
        arrays[name] = arr.reshape(entry["shape"])

    missing = set(RAY_ARRAYS + SAMPLE_ARRAYS) - set(arrays)
    if missing:
        raise BundleError(f"{path}: missing arrays {sorted(missing)}")
    n = arrays["sample_ray"].shape[0]
    r = arrays["rays_id"].shape[0]
    if manifest["n_pts"] != n or manifest["ray_count"] != r:
        raise BundleError(f"{path}: manifest counts disagree with stored arrays")
    for name in SAMPLE_ARRAYS:
        if arrays[name].shape[0] != n:
            raise BundleError(f"{path}: {name} has inconsistent length")
    for name in RAY_ARRAYS:
        if arrays[name].shape[0] != r:
            raise BundleError(f"{path}: {name} has inconsistent length")
    return LoadedBundle(manifest, arrays)


def horizontal_fov_rad(view: dict) -> float:
    """Horizontal field of view from the stored vertical one (square pixels)."""
    focal = (view["height"] / 2.0) / math.tan(math.radians(view["fov_deg"]) / 2.0)
    return 2.0 * math.atan((view["width"] / 2.0) / focal)


def transforms_manifest(bundle: LoadedBundle) -> dict:
    """Camera poses in the transforms-manifest convention used by common
    neural-rendering training frameworks.

    The bundle's convention (right-handed, camera looks down -Z, Y up,
    row-major world-from-camera matrices) already matches, so poses pass
    through unchanged; the horizontal field of view is derived from the
    stored vertical one.
    """
    views = bundle.views
    if not views:
        raise BundleError("bundle has no views")
    return {
        "camera_angle_x": horizontal_fov_rad(views[0]),
        "frames": [{
            "file_path": f"view_{v['view_id']:03d}",
            "camera_angle_x": horizontal_fov_rad(v),
            "transform_matrix": v["pose"],
            "role": v.get("role", "train"),
        } for v in views],
    }

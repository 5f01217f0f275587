"""On-disk formats: scene descriptions, OBJ import, procedural primitives,
and the dataset / prediction interchange bundles.

Scenes are versioned JSON (small, human-authored, reviewed); fields and
predictions are binary bundles: a JSON manifest describing array shapes,
dtypes, endianness and content hashes, next to raw little-endian arrays.
All serialization is deterministic: fixed key order, fixed float
formatting, fixed endianness, so identical inputs produce byte-identical
files and the scene hash is stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .field import EMPTY_SURFACE, ExplicitField, ViewInfo
from .geometry import RectSurface, TriangleSurface
from .metrics import AlignmentError, PredictionSet
from .scene import (Camera, LightSource, Material, Scene, SceneValidationError,
                    ShaderSpec, SynthConfig)

SCENE_FORMAT = "rayfield-scene"
DATASET_FORMAT = "rayfield-dataset"
PREDICTIONS_FORMAT = "rayfield-predictions"
FORMAT_VERSION = 1

CAMERA_CONVENTION = ("right-handed; camera looks down -Z with Y up; "
                     "pose is a row-major 4x4 world-from-camera matrix")

# Stored in unsigned id arrays for empty-space samples.
EMPTY_SURFACE_U32 = 0xFFFFFFFF


class DatasetError(ValueError):
    """A dataset or prediction bundle is inconsistent or corrupted."""


# ---------------------------------------------------------------------------
# scene serialization


def _vec(x) -> list[float]:
    return [float(v) for v in x]


def scene_to_dict(scene: Scene) -> dict:
    surfaces = []
    for s in scene.surfaces:
        if isinstance(s, TriangleSurface):
            surfaces.append({"type": "triangle",
                             "vertices": [_vec(s.a), _vec(s.b), _vec(s.c)],
                             "material": s.material_id})
        else:
            surfaces.append({"type": "rect", "corner": _vec(s.corner),
                             "edge_u": _vec(s.edge_u), "edge_v": _vec(s.edge_v),
                             "material": s.material_id})
    return {
        "format": SCENE_FORMAT,
        "version": FORMAT_VERSION,
        "materials": {name: {"albedo": _vec(m.albedo), "density": m.density,
                             "glass": m.glass, "reflectance": m.reflectance}
                      for name, m in sorted(scene.materials.items())},
        "glass_intensity_scale": scene.glass_intensity_scale,
        "lights": [{"position": _vec(l.position), "intensity": l.intensity,
                    "radius": l.radius} for l in scene.lights],
        "shaders": [{"kind": s.kind, "light_samples": s.light_samples,
                     "trace_order": s.trace_order, "colour_range": s.colour_range,
                     "label": s.label, "targets": s.targets} for s in scene.shaders],
        "synth": {"t_max": scene.config.t_max, "delta": scene.config.delta,
                  "hit_mode": scene.config.hit_mode,
                  "empty_space": scene.config.empty_space,
                  "background": _vec(scene.config.background),
                  "quantize_bits": scene.config.quantize_bits},
        "surfaces": surfaces,
        "cameras": [{"pose": [[float(v) for v in row] for row in c.pose],
                     "fov_deg": c.fov_deg, "resolution": [c.height, c.width],
                     "role": c.role} for c in scene.cameras],
    }


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SceneValidationError(f"{where}: missing required field {key!r}")
    return d[key]


def scene_from_dict(data: dict) -> Scene:
    if _require(data, "format", "scene") != SCENE_FORMAT:
        raise SceneValidationError("scene.format: not a scene description")
    if _require(data, "version", "scene") != FORMAT_VERSION:
        raise SceneValidationError(f"scene.version: unsupported version {data['version']!r}")

    materials = {}
    for name, m in _require(data, "materials", "scene").items():
        where = f"materials[{name!r}]"
        try:
            materials[name] = Material(albedo=tuple(_require(m, "albedo", where)),
                                       density=float(m.get("density", 1.0)),
                                       glass=bool(m.get("glass", False)),
                                       reflectance=float(m.get("reflectance", 0.0)))
        except SceneValidationError as e:
            raise SceneValidationError(f"{where}: {e}") from None

    lights = []
    for i, l in enumerate(data.get("lights", [])):
        where = f"lights[{i}]"
        try:
            lights.append(LightSource(position=tuple(_require(l, "position", where)),
                                      intensity=float(l.get("intensity", 1.0)),
                                      radius=float(l.get("radius", 0.0))))
        except SceneValidationError as e:
            raise SceneValidationError(f"{where}: {e}") from None

    shaders = []
    for i, s in enumerate(data.get("shaders", [])):
        where = f"shaders[{i}]"
        try:
            shaders.append(ShaderSpec(kind=_require(s, "kind", where),
                                      light_samples=int(s.get("light_samples", 1)),
                                      trace_order=int(s.get("trace_order",
                                                            1 if s.get("kind") == "diffuse" else 2)),
                                      colour_range=float(s.get("colour_range", 256.0)),
                                      label=s.get("label", ""),
                                      targets=s.get("targets", "all")))
        except SceneValidationError as e:
            raise SceneValidationError(f"{where}: {e}") from None

    sy = data.get("synth", {})
    try:
        config = SynthConfig(t_max=float(sy.get("t_max", 1000.0)),
                             delta=float(sy.get("delta", 0.001)),
                             hit_mode=sy.get("hit_mode", "all"),
                             empty_space=sy.get("empty_space", "far-bound-sample"),
                             background=tuple(sy.get("background", (0.0, 0.0, 0.0))),
                             quantize_bits=int(sy.get("quantize_bits", 0)))
    except SceneValidationError as e:
        raise SceneValidationError(f"synth: {e}") from None

    surfaces = []
    for i, s in enumerate(_require(data, "surfaces", "scene")):
        where = f"surfaces[{i}]"
        kind = _require(s, "type", where)
        material = _require(s, "material", where)
        try:
            if kind == "triangle":
                verts = _require(s, "vertices", where)
                if len(verts) != 3:
                    raise SceneValidationError("triangle needs exactly 3 vertices")
                surfaces.append(TriangleSurface.from_vertices(*verts, material_id=material))
            elif kind == "rect":
                surfaces.append(RectSurface.from_corner_edges(
                    _require(s, "corner", where), _require(s, "edge_u", where),
                    _require(s, "edge_v", where), material_id=material))
            else:
                raise SceneValidationError(f"unknown surface type {kind!r}")
        except (ValueError, SceneValidationError) as e:
            raise SceneValidationError(f"{where}: {e}") from None

    cameras = []
    for i, c in enumerate(data.get("cameras", [])):
        where = f"cameras[{i}]"
        try:
            res = _require(c, "resolution", where)
            cameras.append(Camera(pose=_require(c, "pose", where),
                                  fov_deg=float(_require(c, "fov_deg", where)),
                                  height=int(res[0]), width=int(res[1]),
                                  role=c.get("role", "train")))
        except SceneValidationError as e:
            raise SceneValidationError(f"{where}: {e}") from None

    try:
        return Scene(surfaces=surfaces, materials=materials, lights=lights,
                     shaders=shaders, cameras=cameras, config=config,
                     glass_intensity_scale=float(data.get("glass_intensity_scale", 0.5)))
    except SceneValidationError as e:
        raise SceneValidationError(f"scene: {e}") from None


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), sort_keys=True, indent=2) + "\n")


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SceneValidationError(f"{path}: not valid JSON ({e})") from None
    return scene_from_dict(data)


def scene_hash(scene: Scene) -> str:
    """Stable content hash over the canonical scene serialization."""
    canonical = json.dumps(scene_to_dict(scene), sort_keys=True,
                           separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(canonical).hexdigest()


# ---------------------------------------------------------------------------
# OBJ import


def import_obj(path, material_id: str = "default") -> list[TriangleSurface]:
    """Triangles from a Wavefront OBJ file.

    Only `v` and triangular `f` records contribute; normals, texture
    coordinates and grouping records are ignored.  Quad or n-gon faces are
    rejected with their line number.  Winding order defines the normal
    direction (right-hand rule).
    """
    verts: list[tuple[float, float, float]] = []
    tris: list[TriangleSurface] = []
    path = Path(path)
    with path.open() as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise SceneValidationError(f"{path}:{lineno}: vertex needs 3 coordinates")
                verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
            elif parts[0] == "f":
                ids = []
                for tok in parts[1:]:
                    idx = int(tok.split("/")[0])
                    ids.append(idx - 1 if idx > 0 else len(verts) + idx)
                if len(ids) != 3:
                    raise SceneValidationError(
                        f"{path}:{lineno}: only triangular faces are supported "
                        f"(face has {len(ids)} vertices)")
                for idx in ids:
                    if not (0 <= idx < len(verts)):
                        raise SceneValidationError(f"{path}:{lineno}: vertex index out of range")
                tris.append(TriangleSurface.from_vertices(
                    verts[ids[0]], verts[ids[1]], verts[ids[2]], material_id=material_id))
    return tris


# ---------------------------------------------------------------------------
# procedural primitives


def _apply_affine(transform: np.ndarray | None, points: np.ndarray) -> np.ndarray:
    if transform is None:
        return points
    return points @ transform[:3, :3].T + transform[:3, 3]


def _check_transform(transform) -> np.ndarray | None:
    if transform is None:
        return None
    t = np.asarray(transform, dtype=np.float64)
    if t.shape != (4, 4):
        raise ValueError("transform must be a 4x4 matrix")
    if abs(np.linalg.det(t[:3, :3])) < 1e-12:
        raise ValueError("degenerate transform (zero scale)")
    return t


def _quad(tris: list, p0, p1, p2, p3, material_id: str) -> None:
    tris.append(TriangleSurface.from_vertices(p0, p1, p2, material_id=material_id))
    tris.append(TriangleSurface.from_vertices(p0, p2, p3, material_id=material_id))


def build_primitive(kind: str, transform=None, material_id: str = "default",
                    segments: int = 16, rings: int = 8, as_rect: bool = False) -> list:
    """Triangulated unit primitives with consistent outward normals.

    box: unit cube (12 triangles); uv_sphere: unit radius, 2 * segments *
    (rings - 1) triangles; plane: unit square in the XY plane, either two
    triangles or a single rectangle.  The optional 4x4 affine transform is
    applied to all vertices.
    """
    t = _check_transform(transform)
    if kind == "box":
        s = 0.5
        corners = {(x, y, z): np.array([x * s, y * s, z * s]) for x in (-1, 1)
                   for y in (-1, 1) for z in (-1, 1)}
        c = corners
        tris: list = []
        _quad(tris, c[1, -1, -1], c[1, 1, -1], c[1, 1, 1], c[1, -1, 1], material_id)
        _quad(tris, c[-1, -1, -1], c[-1, -1, 1], c[-1, 1, 1], c[-1, 1, -1], material_id)
        _quad(tris, c[-1, 1, -1], c[-1, 1, 1], c[1, 1, 1], c[1, 1, -1], material_id)
        _quad(tris, c[-1, -1, -1], c[1, -1, -1], c[1, -1, 1], c[-1, -1, 1], material_id)
        _quad(tris, c[-1, -1, 1], c[1, -1, 1], c[1, 1, 1], c[-1, 1, 1], material_id)
        _quad(tris, c[-1, -1, -1], c[-1, 1, -1], c[1, 1, -1], c[1, -1, -1], material_id)
        return [TriangleSurface.from_vertices(*_apply_affine(t, tri.vertices),
                                              material_id=material_id) for tri in tris]

    if kind == "uv_sphere":
        if segments < 3 or rings < 2:
            raise ValueError("uv_sphere requires segments >= 3 and rings >= 2")

        def point(i: int, j: int) -> np.ndarray:
            phi = math.pi * i / rings
            theta = 2.0 * math.pi * j / segments
            return np.array([math.sin(phi) * math.cos(theta),
                             math.sin(phi) * math.sin(theta),
                             math.cos(phi)])

        north = np.array([0.0, 0.0, 1.0])
        south = np.array([0.0, 0.0, -1.0])
        tris = []
        for j in range(segments):
            jn = (j + 1) % segments
            tris.append(TriangleSurface.from_vertices(
                north, point(1, j), point(1, jn), material_id=material_id))
            tris.append(TriangleSurface.from_vertices(
                south, point(rings - 1, jn), point(rings - 1, j), material_id=material_id))
            for i in range(1, rings - 1):
                _quad(tris, point(i, j), point(i + 1, j), point(i + 1, jn),
                      point(i, jn), material_id)
        return [TriangleSurface.from_vertices(*_apply_affine(t, tri.vertices),
                                              material_id=material_id) for tri in tris]

    if kind == "plane":
        corner = np.array([-0.5, -0.5, 0.0])
        eu = np.array([1.0, 0.0, 0.0])
        ev = np.array([0.0, 1.0, 0.0])
        if as_rect:
            if t is None:
                return [RectSurface.from_corner_edges(corner, eu, ev, material_id=material_id)]
            return [RectSurface.from_corner_edges(
                _apply_affine(t, corner[None])[0], t[:3, :3] @ eu, t[:3, :3] @ ev,
                material_id=material_id)]
        tris = []
        _quad(tris, corner, corner + eu, corner + eu + ev, corner + ev, material_id)
        return [TriangleSurface.from_vertices(*_apply_affine(t, tri.vertices),
                                              material_id=material_id) for tri in tris]

    raise ValueError(f"unknown primitive kind {kind!r}")


# ---------------------------------------------------------------------------
# dataset bundles


def _dataset_arrays(field: ExplicitField) -> dict[str, np.ndarray]:
    surf = field.sample_surface.astype(np.int64).copy()
    surf[surf == EMPTY_SURFACE] = EMPTY_SURFACE_U32
    return {
        "rays_id": field.ray_ids.astype("<u4"),
        "rays_origin": field.ray_origins.astype("<f4"),
        "rays_direction": field.ray_directions.astype("<f4"),
        "rays_view": field.ray_views.astype("<u4"),
        "sample_view": field.sample_view.astype("<u4"),
        "sample_ray": field.sample_ray.astype("<u4"),
        "sample_surface": surf.astype("<u4"),
        "sample_t": field.sample_t.astype("<f4"),
        "sample_delta_prime": field.sample_delta_prime.astype("<f4"),
        "sample_position": field.sample_position.astype("<f4"),
        "sample_direction": field.sample_direction.astype("<f4"),
        "sample_colour": field.sample_colour.astype("<f4"),
        "sample_density": field.sample_density.astype("<f4"),
        "sample_is_empty": field.sample_is_empty.astype("<u4"),
    }


def _write_bundle(path: Path, manifest: dict, arrays: dict[str, np.ndarray]) -> None:
    path.mkdir(parents=True, exist_ok=True)
    entries = {}
    for name, arr in arrays.items():
        raw = arr.tobytes()
        (path / f"{name}.bin").write_bytes(raw)
        entries[name] = {"file": f"{name}.bin", "dtype": arr.dtype.str,
                         "shape": list(arr.shape),
                         "sha256": hashlib.sha256(raw).hexdigest()}
    manifest = dict(manifest, arrays=entries)
    (path / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _read_bundle(path: Path, expected_format: str) -> tuple[dict, dict[str, np.ndarray]]:
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise DatasetError(f"{path}: no manifest.json found")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("format") != expected_format:
        raise DatasetError(f"{path}: manifest format is not {expected_format!r}")
    if manifest.get("version") != FORMAT_VERSION:
        raise DatasetError(f"{path}: unsupported bundle version {manifest.get('version')!r}")
    arrays = {}
    for name, entry in manifest["arrays"].items():
        raw = (path / entry["file"]).read_bytes()
        if hashlib.sha256(raw).hexdigest() != entry["sha256"]:
            raise DatasetError(f"{path}/{entry['file']}: content hash mismatch "
                               "(file truncated or corrupted)")
        arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"]))
        expected = int(np.prod(entry["shape"])) if entry["shape"] else 1
        if arr.size != expected:
            raise DatasetError(f"{path}/{entry['file']}: array size {arr.size} does not "
                               f"match declared shape {entry['shape']}")
        arrays[name] = arr.reshape(entry["shape"])
    return manifest, arrays


def export_dataset(field: ExplicitField, path, seed: int = 0,
                   render_mode: str = "modified") -> None:
    """Write a field as a manifest + raw-array bundle.

    Arrays are little-endian float32 / uint32; re-exporting an imported
    bundle is byte-identical.
    """
    path = Path(path)
    manifest = {
        "format": DATASET_FORMAT,
        "version": FORMAT_VERSION,
        "endianness": "little",
        "camera_convention": CAMERA_CONVENTION,
        "scene_hash": field.scene_hash,
        "seed": int(seed),
        "render_mode": render_mode,
        "surface_count": field.surface_count,
        "ray_count": field.ray_count,
        "n_pts": field.n_pts,
        "synth": {"t_max": field.config.t_max, "delta": field.config.delta,
                  "hit_mode": field.config.hit_mode,
                  "empty_space": field.config.empty_space,
                  "background": _vec(field.config.background),
                  "quantize_bits": field.config.quantize_bits},
        "views": [{"view_id": v.view_id, "height": v.height, "width": v.width,
                   "fov_deg": v.fov_deg, "role": v.role, "ray_offset": v.ray_offset,
                   "ray_count": v.ray_count,
                   "pose": [[float(x) for x in row] for row in v.pose]}
                  for v in field.views],
    }
    _write_bundle(path, manifest, _dataset_arrays(field))


def read_manifest(path) -> dict:
    return json.loads((Path(path) / "manifest.json").read_text())


def import_dataset(path) -> ExplicitField:
    """Rebuild a field from a bundle, verifying hashes and consistency."""
    path = Path(path)
    manifest, arrays = _read_bundle(path, DATASET_FORMAT)

    required = {
        "rays_id", "rays_origin", "rays_direction", "rays_view", "sample_view",
        "sample_ray", "sample_surface", "sample_t", "sample_delta_prime",
        "sample_position", "sample_direction", "sample_colour", "sample_density",
        "sample_is_empty"}
    missing = required - set(arrays)
    if missing:
        raise DatasetError(f"{path}: bundle is missing arrays {sorted(missing)}")

    r = arrays["rays_id"].shape[0]
    n = arrays["sample_ray"].shape[0]
    for name in ("rays_origin", "rays_direction", "rays_view"):
        if arrays[name].shape[0] != r:
            raise DatasetError(f"{path}: {name} length {arrays[name].shape[0]} != ray count {r}")
    for name in ("sample_view", "sample_surface", "sample_t", "sample_delta_prime",
                 "sample_position", "sample_direction", "sample_colour",
                 "sample_density", "sample_is_empty"):
        if arrays[name].shape[0] != n:
            raise DatasetError(f"{path}: {name} length {arrays[name].shape[0]} != "
                               f"sample count {n}")
    if manifest["n_pts"] != n:
        raise DatasetError(f"{path}: manifest n_pts {manifest['n_pts']} != stored samples {n}")
    if manifest["ray_count"] != r:
        raise DatasetError(f"{path}: manifest ray_count {manifest['ray_count']} != stored rays {r}")

    sy = manifest["synth"]
    config = SynthConfig(t_max=sy["t_max"], delta=sy["delta"], hit_mode=sy["hit_mode"],
                         empty_space=sy["empty_space"],
                         background=tuple(sy["background"]),
                         quantize_bits=sy.get("quantize_bits", 0))
    views = tuple(ViewInfo(view_id=v["view_id"], height=v["height"], width=v["width"],
                           fov_deg=v["fov_deg"],
                           pose=np.array(v["pose"], dtype=np.float64),
                           role=v["role"], ray_offset=v["ray_offset"])
                  for v in manifest["views"])
    surf = arrays["sample_surface"].astype(np.int64)
    surf[surf == EMPTY_SURFACE_U32] = EMPTY_SURFACE
    return ExplicitField(
        ray_ids=arrays["rays_id"].astype(np.int64),
        ray_origins=arrays["rays_origin"].astype(np.float64),
        ray_directions=arrays["rays_direction"].astype(np.float64),
        ray_views=arrays["rays_view"].astype(np.int64),
        views=views,
        sample_ray=arrays["sample_ray"].astype(np.int64),
        sample_view=arrays["sample_view"].astype(np.int64),
        sample_surface=surf,
        sample_t=arrays["sample_t"].astype(np.float64),
        sample_delta_prime=arrays["sample_delta_prime"].astype(np.float64),
        sample_position=arrays["sample_position"].astype(np.float64),
        sample_direction=arrays["sample_direction"].astype(np.float64),
        sample_colour=arrays["sample_colour"].astype(np.float64),
        sample_density=arrays["sample_density"].astype(np.float64),
        sample_is_empty=arrays["sample_is_empty"].astype(bool),
        config=config,
        surface_count=manifest["surface_count"],
        scene_hash=manifest.get("scene_hash"),
    )


# ---------------------------------------------------------------------------
# prediction dumps


def save_predictions(values: np.ndarray, ids: np.ndarray, param: str,
                     scene_hash_value: str | None, path) -> None:
    """Write a prediction dump aligned to a dataset by sample ids."""
    values = np.asarray(values)
    ids = np.asarray(ids)
    if ids.ndim != 1 or values.shape[0] != ids.shape[0]:
        raise AlignmentError("predictions and ids must have matching first dimension")
    manifest = {
        "format": PREDICTIONS_FORMAT,
        "version": FORMAT_VERSION,
        "endianness": "little",
        "param": param,
        "scene_hash": scene_hash_value,
        "sample_count": int(ids.shape[0]),
    }
    _write_bundle(Path(path), manifest,
                  {"ids": ids.astype("<u4"), "values": values.astype("<f4")})


def import_predictions(path, field: ExplicitField) -> PredictionSet:
    """Load a prediction dump and align it to the field's sample order.

    Rows may arrive in any order; ids are positions in the dataset's sample
    arrays and must form a complete permutation.  The dump is rejected when
    its scene hash or sample count disagrees with the field.
    """
    path = Path(path)
    manifest, arrays = _read_bundle(path, PREDICTIONS_FORMAT)
    param = manifest["param"]
    if manifest["sample_count"] != field.n_pts:
        raise AlignmentError(f"{path}: prediction dump has {manifest['sample_count']} "
                             f"samples, field has {field.n_pts}")
    if field.scene_hash is not None and manifest.get("scene_hash") != field.scene_hash:
        raise AlignmentError(f"{path}: prediction scene hash "
                             f"{manifest.get('scene_hash')!r} does not match the "
                             f"dataset's {field.scene_hash!r}")
    ids = arrays["ids"].astype(np.int64)
    values = arrays["values"].astype(np.float64)
    if values.shape[0] != ids.shape[0]:
        raise AlignmentError(f"{path}: ids/values length mismatch")
    if not np.array_equal(np.sort(ids), np.arange(field.n_pts)):
        raise AlignmentError(f"{path}: sample ids are not a complete permutation "
                             f"of 0..{field.n_pts - 1}")
    aligned = np.empty_like(values)
    aligned[ids] = values
    return PredictionSet(param=param, values=aligned)

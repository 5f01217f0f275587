"""Scene model: materials, lights, shader specs, cameras, synthesis config.

A Scene is the immutable in-memory description that the casting, shading
and rendering stages consume.  Serialization to/from the on-disk schema
lives in sceneio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import RectSurface, TriangleSurface, as_vec3

HIT_MODES = ("all", "earliest")
EMPTY_SPACE_MODES = ("far-bound-sample", "omit")
SHADER_KINDS = ("diffuse", "reflection")
SHADER_TARGETS = ("all", "solid", "glass")
CAMERA_ROLES = ("train", "novel")


class SceneValidationError(ValueError):
    """A scene description violates an invariant.  The message names the
    offending field."""


@dataclass(frozen=True)
class SynthConfig:
    """Sampling rules for ground-truth synthesis.

    hit_mode "all" keeps every masked intersection along a ray; "earliest"
    keeps only the minimum-t one.  Rays with no intersection get a single
    zero-density sample at t_max when empty_space is "far-bound-sample",
    and nothing when it is "omit".
    """

    t_max: float = 1000.0
    delta: float = 0.001
    hit_mode: str = "all"
    empty_space: str = "far-bound-sample"
    background: tuple[float, float, float] = (0.0, 0.0, 0.0)
    quantize_bits: int = 0  # 0 disables colour quantization after shading

    def __post_init__(self):
        if not (self.t_max > 0.0):
            raise SceneValidationError("synth.t_max must be > 0")
        if not (self.delta > 0.0):
            raise SceneValidationError("synth.delta must be > 0")
        if self.hit_mode not in HIT_MODES:
            raise SceneValidationError(f"synth.hit_mode must be one of {HIT_MODES}")
        if self.empty_space not in EMPTY_SPACE_MODES:
            raise SceneValidationError(f"synth.empty_space must be one of {EMPTY_SPACE_MODES}")
        if self.quantize_bits not in (0, 8, 16):
            raise SceneValidationError("synth.quantize_bits must be 0, 8 or 16")
        bg = tuple(float(x) for x in self.background)
        if len(bg) != 3 or any(not (0.0 <= x <= 1.0) for x in bg):
            raise SceneValidationError("synth.background must be RGB in [0,1]")
        object.__setattr__(self, "background", bg)


@dataclass(frozen=True)
class Material:
    """Base colour and density assigned to a surface before shading.

    Solid materials have density exactly 1; glass-like materials have
    density strictly below 1 and may reflect.
    """

    albedo: tuple[float, float, float]
    density: float = 1.0
    glass: bool = False
    reflectance: float = 0.0

    def __post_init__(self):
        alb = tuple(float(x) for x in self.albedo)
        if len(alb) != 3 or any(not (0.0 <= x <= 1.0) for x in alb):
            raise SceneValidationError("material.albedo must be RGB in [0,1]")
        object.__setattr__(self, "albedo", alb)
        if not (0.0 < self.density <= 1.0):
            raise SceneValidationError("material.density must be in (0,1]")
        if self.glass and self.density >= 1.0:
            raise SceneValidationError("glass material requires density < 1")
        if not self.glass and self.density != 1.0:
            raise SceneValidationError("solid material requires density == 1")
        if not (0.0 <= self.reflectance <= 1.0):
            raise SceneValidationError("material.reflectance must be in [0,1]")


@dataclass(frozen=True)
class LightSource:
    """Point light (radius 0) or disc area light (radius > 0)."""

    position: tuple[float, float, float]
    intensity: float = 1.0
    radius: float = 0.0

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position)
        if len(pos) != 3 or any(not math.isfinite(x) for x in pos):
            raise SceneValidationError("light.position must be a finite 3-vector")
        object.__setattr__(self, "position", pos)
        if not (math.isfinite(self.intensity) and self.intensity > 0.0):
            raise SceneValidationError("light.intensity must be finite and > 0")
        if not (self.radius >= 0.0):
            raise SceneValidationError("light.radius must be >= 0")

    @property
    def position_array(self) -> np.ndarray:
        return np.array(self.position, dtype=np.float64)


@dataclass(frozen=True)
class ShaderSpec:
    """Configured effort of one shader pass.

    light_samples is the per-light sample count, trace_order the number of
    ray segments the shader integrates over (1 for diffuse, >= 2 for
    reflection), and colour_range the maximum colour transformation range
    the shader can produce, in 8-bit units (256 = full range).  ``targets``
    restricts a diffuse pass to solid or glass samples so the two material
    classes can be configured with different effort.
    """

    kind: str
    light_samples: int = 1
    trace_order: int = 1
    colour_range: float = 256.0
    label: str = ""
    targets: str = "all"

    def __post_init__(self):
        if self.kind not in SHADER_KINDS:
            raise SceneValidationError(f"shader.kind must be one of {SHADER_KINDS}")
        if not (isinstance(self.light_samples, int) and self.light_samples > 0):
            raise SceneValidationError("shader.light_samples must be a positive integer")
        if not (isinstance(self.trace_order, int) and self.trace_order > 0):
            raise SceneValidationError("shader.trace_order must be a positive integer")
        if self.kind == "diffuse" and self.trace_order != 1:
            raise SceneValidationError("diffuse shader requires trace_order == 1")
        if self.kind == "reflection" and self.trace_order < 2:
            raise SceneValidationError("reflection shader requires trace_order >= 2")
        if not (0.0 < self.colour_range <= 256.0):
            raise SceneValidationError("shader.colour_range must be in (0, 256]")
        if self.targets not in SHADER_TARGETS:
            raise SceneValidationError(f"shader.targets must be one of {SHADER_TARGETS}")
        if not self.label:
            object.__setattr__(self, "label", self.kind)


class Camera:
    """Pinhole camera: 4x4 world-from-camera pose (right-handed, looking
    down -Z, Y up), vertical field of view, square pixels."""

    def __init__(self, pose, fov_deg: float, height: int, width: int, role: str = "train"):
        pose = np.asarray(pose, dtype=np.float64)
        if pose.shape != (4, 4):
            raise SceneValidationError("camera.pose must be a 4x4 matrix")
        if not np.all(np.isfinite(pose)):
            raise SceneValidationError("camera.pose has non-finite entries")
        if not np.allclose(pose[3], [0.0, 0.0, 0.0, 1.0], atol=1e-9):
            raise SceneValidationError("camera.pose last row must be [0,0,0,1]")
        rot = pose[:3, :3]
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6):
            raise SceneValidationError("camera.pose rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-6:
            raise SceneValidationError("camera.pose rotation must have determinant +1")
        if not (0.0 < fov_deg < 180.0):
            raise SceneValidationError("camera.fov_deg must be in (0, 180)")
        if height < 1 or width < 1:
            raise SceneValidationError("camera resolution must be at least 1x1")
        if role not in CAMERA_ROLES:
            raise SceneValidationError(f"camera.role must be one of {CAMERA_ROLES}")
        self.pose = pose
        self.fov_deg = float(fov_deg)
        self.height = int(height)
        self.width = int(width)
        self.role = role

    @property
    def position(self) -> np.ndarray:
        return self.pose[:3, 3].copy()

    @property
    def ray_count(self) -> int:
        return self.height * self.width

    def ray_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pixel rays through pixel centres, row-major.

        Returns (origins, directions), both (H*W, 3) float64 with unit
        directions.
        """
        h, w = self.height, self.width
        focal = (h / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)
        rows, cols = np.meshgrid(np.arange(h, dtype=np.float64),
                                 np.arange(w, dtype=np.float64), indexing="ij")
        x = (cols + 0.5 - w / 2.0) / focal
        y = -(rows + 0.5 - h / 2.0) / focal
        z = -np.ones_like(x)
        dirs_cam = np.stack([x, y, z], axis=-1).reshape(-1, 3)
        dirs = dirs_cam @ self.pose[:3, :3].T
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        origins = np.broadcast_to(self.pose[:3, 3], dirs.shape).copy()
        return origins, dirs

    @classmethod
    def look_at(cls, eye, target, up=(0.0, 1.0, 0.0), fov_deg: float = 60.0,
                height: int = 64, width: int = 64, role: str = "train") -> "Camera":
        """Build a pose from an eye point and a look-at target."""
        eye = as_vec3(eye)
        forward = as_vec3(target) - eye
        fn = np.linalg.norm(forward)
        if fn == 0.0:
            raise SceneValidationError("camera look_at: eye and target coincide")
        forward = forward / fn
        upv = as_vec3(up)
        right = np.cross(forward, upv)
        rn = np.linalg.norm(right)
        if rn < 1e-12:
            raise SceneValidationError("camera look_at: up is parallel to the view direction")
        right = right / rn
        true_up = np.cross(right, forward)
        pose = np.eye(4)
        pose[:3, 0] = right
        pose[:3, 1] = true_up
        pose[:3, 2] = -forward  # camera looks down -Z
        pose[:3, 3] = eye
        return cls(pose, fov_deg=fov_deg, height=height, width=width, role=role)


@dataclass
class Scene:
    """Geometry plus everything needed to synthesize and shade a field."""

    surfaces: list
    materials: dict[str, Material]
    lights: list[LightSource] = field(default_factory=list)
    shaders: list[ShaderSpec] = field(default_factory=list)
    cameras: list[Camera] = field(default_factory=list)
    config: SynthConfig = field(default_factory=SynthConfig)
    glass_intensity_scale: float = 0.5

    def __post_init__(self):
        # a scene with no surfaces is pure empty space, which is still a
        # valid thing to sample
        for i, s in enumerate(self.surfaces):
            if not isinstance(s, (TriangleSurface, RectSurface)):
                raise SceneValidationError(f"surfaces[{i}] has unsupported type {type(s).__name__}")
            if s.material_id not in self.materials:
                raise SceneValidationError(
                    f"surfaces[{i}].material_id {s.material_id!r} not in materials")
        if not (0.0 <= self.glass_intensity_scale <= 1.0):
            raise SceneValidationError("glass_intensity_scale must be in [0,1]")

    def material_of(self, surface_index: int) -> Material:
        return self.materials[self.surfaces[surface_index].material_id]

    def effective_intensity(self, light: LightSource, material: Material) -> float:
        """Per-light intensity after the material rule: glass-like materials
        receive a scaled-down intensity relative to solids."""
        if material.glass:
            return light.intensity * self.glass_intensity_scale
        return light.intensity

    def train_cameras(self) -> list[int]:
        return [i for i, c in enumerate(self.cameras) if c.role == "train"]

    def novel_cameras(self) -> list[int]:
        return [i for i, c in enumerate(self.cameras) if c.role == "novel"]


def with_config(scene: Scene, **updates) -> Scene:
    """Copy of the scene with selected SynthConfig fields replaced."""
    cfg = replace(scene.config, **updates)
    return Scene(surfaces=scene.surfaces, materials=scene.materials, lights=scene.lights,
                 shaders=scene.shaders, cameras=scene.cameras, config=cfg,
                 glass_intensity_scale=scene.glass_intensity_scale)

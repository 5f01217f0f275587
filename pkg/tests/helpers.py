"""Shared scene builders for the test suite."""

import numpy as np

from rayfield.geometry import RectSurface, TriangleSurface
from rayfield.scene import (Camera, LightSource, Material, Scene, ShaderSpec,
                            SynthConfig)
from rayfield.sceneio import build_primitive

WHITE = Material(albedo=(1.0, 1.0, 1.0))
RED = Material(albedo=(1.0, 0.0, 0.0))


def identity_camera(height=1, width=1, fov_deg=60.0, role="train"):
    """Camera at the origin looking down -Z."""
    return Camera(np.eye(4), fov_deg=fov_deg, height=height, width=width, role=role)


def facing_triangle():
    """Large triangle in the plane z = -2 with normal +Z, covering the
    origin-camera frustum centre."""
    return TriangleSurface.from_vertices((-5, -5, -2), (5, -5, -2), (0, 5, -2),
                                         material_id="white")


def single_triangle_scene(height=1, width=1, **config):
    return Scene(surfaces=[facing_triangle()], materials={"white": WHITE},
                 cameras=[identity_camera(height, width)],
                 config=SynthConfig(**config))


def empty_scene(height=2, width=2, **config):
    return Scene(surfaces=[], materials={},
                 cameras=[identity_camera(height, width)],
                 config=SynthConfig(**config))


def cuboid(centre, size, material_id="white"):
    """Axis-aligned cuboid as 6 rectangles with outward normals."""
    cx, cy, cz = centre
    sx, sy, sz = size[0] / 2.0, size[1] / 2.0, size[2] / 2.0
    rects = []

    def rect(corner, eu, ev):
        rects.append(RectSurface.from_corner_edges(corner, eu, ev,
                                                   material_id=material_id))

    rect((cx + sx, cy - sy, cz - sz), (0, 2 * sy, 0), (0, 0, 2 * sz))   # +x
    rect((cx - sx, cy - sy, cz - sz), (0, 0, 2 * sz), (0, 2 * sy, 0))   # -x
    rect((cx - sx, cy + sy, cz - sz), (0, 0, 2 * sz), (2 * sx, 0, 0))   # +y
    rect((cx - sx, cy - sy, cz - sz), (2 * sx, 0, 0), (0, 0, 2 * sz))   # -y
    rect((cx - sx, cy - sy, cz + sz), (2 * sx, 0, 0), (0, 2 * sy, 0))   # +z
    rect((cx - sx, cy - sy, cz - sz), (0, 2 * sy, 0), (2 * sx, 0, 0))   # -z
    return rects


def three_cuboid_scene(height=20, width=20, extra_novel=False, **config):
    """Three rectangular cuboids watched by three neighbouring views (plus,
    optionally, three novel-role views placed differently)."""
    surfaces = (cuboid((-2.0, 0.0, -8.0), (1.5, 2.5, 1.0)) +
                cuboid((0.0, 0.5, -10.0), (1.5, 3.0, 1.2)) +
                cuboid((2.2, -0.3, -9.0), (1.2, 2.0, 0.8)))
    cameras = [
        Camera.look_at((-1.5, 0.0, 0.0), (-1.0, 0.0, -9.0), fov_deg=45.0,
                       height=height, width=width, role="train"),
        Camera.look_at((0.0, 0.3, 1.0), (0.0, 0.0, -9.0), fov_deg=45.0,
                       height=height, width=width, role="train"),
        Camera.look_at((1.5, -0.2, 0.5), (1.0, 0.0, -9.0), fov_deg=45.0,
                       height=height, width=width, role="train"),
    ]
    if extra_novel:
        cameras += [
            Camera.look_at((-3.5, 1.0, 2.0), (0.0, 0.0, -9.0), fov_deg=45.0,
                           height=height, width=width, role="novel"),
            Camera.look_at((0.5, -1.5, 3.0), (0.0, 0.0, -9.0), fov_deg=45.0,
                           height=height, width=width, role="novel"),
            Camera.look_at((4.0, 0.8, 1.5), (0.0, 0.0, -9.0), fov_deg=45.0,
                           height=height, width=width, role="novel"),
        ]
    cfg = dict(t_max=100.0, hit_mode="earliest")
    cfg.update(config)
    return Scene(surfaces=surfaces, materials={"white": WHITE}, cameras=cameras,
                 config=SynthConfig(**cfg))


def lit_box_scene(height=16, width=16, reflective=False, **config):
    """Unit cube in front of the camera, a red backdrop, one point light."""
    materials = {
        "white": WHITE,
        "red": RED,
        "mirror": Material(albedo=(0.2, 0.2, 0.9), density=0.5, glass=True,
                           reflectance=0.6),
    }
    box_mat = "mirror" if reflective else "white"
    surfaces = build_primitive(
        "box", transform=_translate(0.0, 0.0, -4.0), material_id=box_mat)
    surfaces += build_primitive(
        "plane", transform=_scale_translate(6.0, 0.0, 0.0, -9.0),
        material_id="red", as_rect=True)  # corner rays miss it
    lights = [LightSource(position=(2.0, 3.0, 0.0), intensity=1.0)]
    shaders = [ShaderSpec(kind="diffuse", light_samples=4, label="diffuse")]
    if reflective:
        shaders.append(ShaderSpec(kind="reflection", light_samples=1,
                                  trace_order=2, colour_range=2.0,
                                  label="reflection"))
    cameras = [identity_camera(height, width, fov_deg=50.0)]
    return Scene(surfaces=surfaces, materials=materials, lights=lights,
                 shaders=shaders, cameras=cameras, config=SynthConfig(**config))


def _translate(x, y, z):
    t = np.eye(4)
    t[:3, 3] = (x, y, z)
    return t


def _scale_translate(s, x, y, z):
    t = np.eye(4) * s
    t[3, 3] = 1.0
    t[:3, 3] = (x, y, z)
    return t

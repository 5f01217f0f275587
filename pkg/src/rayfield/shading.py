"""Ray-traced material shaders applied to a field's colours.

Two shaders: Lambertian diffuse with per-material light intensity (solid
materials receive the configured intensity, glass-like ones a scaled-down
share), and single-bounce mirror reflection for glass samples.  Both
shoot shadow rays against the full scene; secondary rays start a small
offset along the ray to avoid self-intersection acne.

The lighting convention is normalized so that a head-on, unit-intensity,
unoccluded light yields channel value = albedo.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .field import EMPTY_SURFACE, STREAM_LIGHT, ExplicitField, first_hits, occluded
from .scene import LightSource, Scene, ShaderSpec

log = logging.getLogger("rayfield")

# Secondary rays (shadow / bounce) must travel at least this far.
EPS_OFFSET = 1e-4


@dataclass(frozen=True)
class _SceneArrays:
    """Per-surface lookup tables used by the vectorized shading loops."""

    normals: np.ndarray       # (S,3)
    albedo: np.ndarray        # (S,3)
    glass: np.ndarray         # (S,) bool
    reflectance: np.ndarray   # (S,)


def _scene_arrays(scene: Scene) -> _SceneArrays:
    mats = [scene.material_of(i) for i in range(len(scene.surfaces))]
    return _SceneArrays(
        normals=np.stack([s.n for s in scene.surfaces]),
        albedo=np.array([m.albedo for m in mats]),
        glass=np.array([m.glass for m in mats], dtype=bool),
        reflectance=np.array([m.reflectance for m in mats]),
    )


def _disc_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair perpendicular to each axis row."""
    helper = np.where(np.abs(axis[:, :1]) < 0.9,
                      np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(axis, e1)
    return e1, e2


def _light_factor(scene: Scene, lights: list[LightSource], points: np.ndarray,
                  normals: np.ndarray, glass: np.ndarray, rho: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Accumulated diffuse factor sum_lights (1/rho) sum_k I_eff max(0,n.l) V.

    For a disc light (radius > 0) the rho light positions are jittered
    uniformly on a disc facing each shaded point; a point light needs no
    jitter, so its rho identical samples collapse to one evaluation.
    """
    m = points.shape[0]
    total = np.zeros(m)
    if m == 0:
        return total
    for light in lights:
        lp = light.position_array
        i_eff = np.where(glass, light.intensity * scene.glass_intensity_scale,
                         light.intensity)
        if light.radius > 0.0:
            axis = points - lp
            axis /= np.maximum(np.linalg.norm(axis, axis=1, keepdims=True), 1e-12)
            e1, e2 = _disc_basis(axis)
            u = rng.random((m, rho, 2))
            r = light.radius * np.sqrt(u[..., 0])
            theta = 2.0 * np.pi * u[..., 1]
            lpos = (lp + (r * np.cos(theta))[..., None] * e1[:, None, :]
                    + (r * np.sin(theta))[..., None] * e2[:, None, :])
        else:
            lpos = np.broadcast_to(lp, (m, 1, 3))
        k = lpos.shape[1]
        tolight = lpos - points[:, None, :]
        dist = np.maximum(np.linalg.norm(tolight, axis=-1), 1e-12)
        l_hat = tolight / dist[..., None]
        cos = np.maximum(np.einsum("mc,mkc->mk", normals, l_hat), 0.0)

        vis = np.zeros((m, k))
        lit = np.nonzero(cos > 0.0)
        if len(lit[0]):
            blocked = occluded(scene.surfaces,
                               points[lit[0]], l_hat[lit], dist[lit],
                               min_t=EPS_OFFSET)
            vis[lit] = ~blocked
        total += i_eff * (cos * vis).mean(axis=1)
    return total


def _shade_points(scene: Scene, lights: list[LightSource], arrays: _SceneArrays,
                  surf_idx: np.ndarray, points: np.ndarray, incoming: np.ndarray,
                  rho: int, depth_left: int, rng: np.random.Generator,
                  t_max: float, delta: float, background) -> np.ndarray:
    """Shaded colour of arbitrary surface points hit by secondary rays.

    Diffuse everywhere; while bounce depth remains, glass surfaces blend in
    one more mirror bounce of the incoming direction.
    """
    normals = arrays.normals[surf_idx]
    glass = arrays.glass[surf_idx]
    factor = _light_factor(scene, lights, points, normals, glass, rho, rng)
    colour = np.clip(arrays.albedo[surf_idx] * factor[:, None], 0.0, 1.0)

    if depth_left > 1:
        again = glass & (arrays.reflectance[surf_idx] > 0.0)
        if again.any():
            idx = np.nonzero(again)[0]
            n = normals[idx]
            d = incoming[idx]
            bdir = d - 2.0 * np.einsum("mc,mc->m", d, n)[:, None] * n
            bsurf, _bt, bpos = first_hits(scene.surfaces, points[idx], bdir,
                                          t_max, delta, min_t=EPS_OFFSET)
            bcol = np.tile(np.asarray(background, dtype=np.float64), (len(idx), 1))
            hit = bsurf != EMPTY_SURFACE
            if hit.any():
                bcol[hit] = _shade_points(scene, lights, arrays, bsurf[hit],
                                          bpos[hit], bdir[hit], rho,
                                          depth_left - 1, rng, t_max, delta,
                                          background)
            refl = arrays.reflectance[surf_idx[idx]][:, None]
            colour[idx] = (1.0 - refl) * colour[idx] + refl * bcol
    return colour


def _target_mask(field: ExplicitField, targets: str) -> np.ndarray:
    mask = ~field.sample_is_empty
    if targets == "solid":
        mask &= field.sample_density >= 1.0
    elif targets == "glass":
        mask &= field.sample_density < 1.0
    return mask


def shade_diffuse(field: ExplicitField, scene: Scene,
                  lights: list[LightSource] | None = None,
                  spec: ShaderSpec | None = None, seed: int = 0) -> ExplicitField:
    """Lambertian pass: c = clamp01(c0 * (1/rho) sum_k I_eff max(0, n.l) V).

    Empty-space samples are untouched.  With no lights the field is
    returned unchanged and a warning is emitted.
    """
    if spec is None:
        spec = ShaderSpec(kind="diffuse", light_samples=1)
    if spec.kind != "diffuse":
        raise ValueError("shade_diffuse requires a diffuse shader spec")
    lights = scene.lights if lights is None else lights
    if not lights:
        log.warning("shade_diffuse: no lights configured; field unchanged")
        return field

    arrays = _scene_arrays(scene)
    mask = _target_mask(field, spec.targets)
    if not mask.any():
        return field
    surf = field.sample_surface[mask]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), STREAM_LIGHT]))
    factor = _light_factor(scene, lights, field.sample_position[mask],
                           arrays.normals[surf], arrays.glass[surf],
                           spec.light_samples, rng)
    colours = field.sample_colour.copy()
    colours[mask] = np.clip(arrays.albedo[surf] * factor[:, None], 0.0, 1.0)
    return field.with_colours(colours)


def shade_reflection(field: ExplicitField, scene: Scene,
                     lights: list[LightSource] | None = None,
                     spec: ShaderSpec | None = None, seed: int = 0) -> ExplicitField:
    """Mirror pass for glass samples (density < 1).

    Each glass sample casts the reflected ray from its position, shades the
    earliest surface it meets diffusely (recursing while trace_order
    allows) and blends: c = (1-reflectance) * c + reflectance * c_bounce.
    A missed bounce reflects the background colour.  Solid and empty-space
    samples are untouched.
    """
    if spec is None:
        spec = ShaderSpec(kind="reflection", light_samples=1, trace_order=2)
    if spec.kind != "reflection":
        raise ValueError("shade_reflection requires a reflection shader spec")
    lights = scene.lights if lights is None else lights
    if not lights:
        log.warning("shade_reflection: no lights configured; field unchanged")
        return field

    arrays = _scene_arrays(scene)
    mask = (~field.sample_is_empty) & (field.sample_density < 1.0)
    if not mask.any():
        return field
    idx = np.nonzero(mask)[0]
    surf = field.sample_surface[idx]
    n = arrays.normals[surf]
    d = field.sample_direction[idx]
    bdir = d - 2.0 * np.einsum("mc,mc->m", d, n)[:, None] * n

    bsurf, _bt, bpos = first_hits(scene.surfaces, field.sample_position[idx], bdir,
                                  field.config.t_max, field.config.delta,
                                  min_t=EPS_OFFSET)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), STREAM_LIGHT, 1]))
    bounce_colour = np.tile(np.array(field.config.background), (len(idx), 1))
    hit = bsurf != EMPTY_SURFACE
    if hit.any():
        bounce_colour[hit] = _shade_points(scene, lights, arrays, bsurf[hit],
                                           bpos[hit], bdir[hit],
                                           spec.light_samples,
                                           spec.trace_order - 1, rng,
                                           field.config.t_max, field.config.delta,
                                           field.config.background)
    refl = arrays.reflectance[surf][:, None]
    colours = field.sample_colour.copy()
    colours[idx] = (1.0 - refl) * colours[idx] + refl * bounce_colour
    return field.with_colours(colours)


def quantize_colours(field: ExplicitField, bit_depth: int) -> ExplicitField:
    """Snap colours to the b-bit lattice: c -> round(c * (2^b - 1)) / (2^b - 1)."""
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    levels = float(2 ** bit_depth - 1)
    return field.with_colours(np.round(field.sample_colour * levels) / levels)


def apply_shaders(field: ExplicitField, scene: Scene, seed: int = 0) -> ExplicitField:
    """Run the scene's configured shader pipeline: diffuse passes in listed
    order, then reflection passes, then optional quantization."""
    shaded = field
    for i, spec in enumerate(s for s in scene.shaders if s.kind == "diffuse"):
        shaded = shade_diffuse(shaded, scene, spec=spec, seed=seed + i)
    for i, spec in enumerate(s for s in scene.shaders if s.kind == "reflection"):
        shaded = shade_reflection(shaded, scene, spec=spec, seed=seed + i)
    if scene.config.quantize_bits:
        shaded = quantize_colours(shaded, scene.config.quantize_bits)
    return shaded

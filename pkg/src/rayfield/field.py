"""Explicit radiance-field synthesis by analytic ray casting.

A field is the set of per-ray volumetric samples (depth t, slant-corrected
thickness, colour, density, position, direction) obtained by intersecting
every view ray with every scene surface and masking the hits that fall
inside the surface bounds.  Rays with no hit receive a single zero-density
sample at the far bound so empty space is represented explicitly.

Columns are kept as flat numpy arrays sorted by (ray, t); this is both the
in-memory layout and the basis of the on-disk interchange format.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .geometry import (EPS_GRAZING, EPS_PARALLEL, RectSurface, TriangleSurface)
from .scene import Camera, Scene, SceneValidationError, SynthConfig

log = logging.getLogger("rayfield")

# Named sub-streams so one top-level seed drives every random choice.
STREAM_SPLIT = 1
STREAM_LIGHT = 2

# Surface index stored for empty-space samples.
EMPTY_SURFACE = -1


@dataclass(frozen=True, eq=False)
class RaySample:
    """One volumetric sample along a ray."""

    ray_index: int
    surface_index: int  # EMPTY_SURFACE for empty-space samples
    t: float
    delta_prime: float
    position: np.ndarray
    direction: np.ndarray
    colour: np.ndarray
    density: float
    is_empty_space: bool = False


@dataclass(eq=False)
class SampleBatch:
    """Columnar batch of ray samples, sorted by (ray, t)."""

    ray: np.ndarray            # (N,) int64 global ray ids
    surface: np.ndarray        # (N,) int64, EMPTY_SURFACE for empty space
    t: np.ndarray              # (N,) float64
    delta_prime: np.ndarray    # (N,) float64
    position: np.ndarray       # (N,3) float64
    direction: np.ndarray      # (N,3) float64
    colour: np.ndarray         # (N,3) float64
    density: np.ndarray        # (N,) float64
    is_empty: np.ndarray       # (N,) bool
    grazing: np.ndarray        # (N,) bool, diagnostics only

    def __len__(self) -> int:
        return self.ray.shape[0]

    def samples(self) -> list[RaySample]:
        return [RaySample(ray_index=int(self.ray[i]), surface_index=int(self.surface[i]),
                          t=float(self.t[i]), delta_prime=float(self.delta_prime[i]),
                          position=self.position[i].copy(), direction=self.direction[i].copy(),
                          colour=self.colour[i].copy(), density=float(self.density[i]),
                          is_empty_space=bool(self.is_empty[i]))
                for i in range(len(self))]


def _empty_batch() -> SampleBatch:
    z = np.zeros(0)
    z3 = np.zeros((0, 3))
    zi = np.zeros(0, dtype=np.int64)
    zb = np.zeros(0, dtype=bool)
    return SampleBatch(ray=zi, surface=zi.copy(), t=z, delta_prime=z.copy(),
                       position=z3, direction=z3.copy(), colour=z3.copy(),
                       density=z.copy(), is_empty=zb, grazing=zb.copy())


def _contained_triangle(tri: TriangleSurface, points: np.ndarray) -> np.ndarray:
    v0 = tri.b - tri.a
    v1 = tri.c - tri.a
    d00 = float(v0 @ v0)
    d01 = float(v0 @ v1)
    d11 = float(v1 @ v1)
    denom = d00 * d11 - d01 * d01
    v2 = points - tri.a
    d20 = v2 @ v0
    d21 = v2 @ v1
    beta = (d11 * d20 - d01 * d21) / denom
    gamma = (d00 * d21 - d01 * d20) / denom
    alpha = 1.0 - beta - gamma
    return (alpha > 0.0) & (beta > 0.0) & (gamma > 0.0)


def _contained_rect(rect: RectSurface, points: np.ndarray) -> np.ndarray:
    q = points - rect.corner
    lu = float(np.linalg.norm(rect.edge_u))
    lv = float(np.linalg.norm(rect.edge_v))
    u = (q @ rect.edge_u) / lu
    v = (q @ rect.edge_v) / lv
    return (u >= 0.0) & (u <= lu) & (v >= 0.0) & (v <= lv)


def intersect_rays(surfaces, origins: np.ndarray, dirs: np.ndarray, t_max: float,
                   delta: float, min_t: float = 0.0):
    """All masked intersections of a ray batch against a surface list.

    origins/dirs are (R,3) with unit directions.  Returns flat arrays
    (ray_index, surface_index, t, delta_prime, position, grazing) covering
    every hit with min_t < t <= t_max that passes containment, unsorted.
    """
    rays_out, surf_out, t_out, dp_out, pos_out, graz_out = [], [], [], [], [], []
    for si, surf in enumerate(surfaces):
        denom = dirs @ surf.n
        valid = np.abs(denom) > EPS_PARALLEL
        safe = np.where(valid, denom, 1.0)
        t = -((origins @ surf.n) + surf.k) / safe
        valid &= (t > min_t) & (t <= t_max)
        if not valid.any():
            continue
        idx = np.nonzero(valid)[0]
        pts = origins[idx] + t[idx, None] * dirs[idx]
        if isinstance(surf, TriangleSurface):
            inside = _contained_triangle(surf, pts)
        else:
            inside = _contained_rect(surf, pts)
        if not inside.any():
            continue
        idx = idx[inside]
        cos = np.abs(denom[idx])
        rays_out.append(idx)
        surf_out.append(np.full(idx.shape, si, dtype=np.int64))
        t_out.append(t[idx])
        dp_out.append(delta / np.maximum(cos, EPS_GRAZING))
        pos_out.append(pts[inside])
        graz_out.append(cos < EPS_GRAZING)
    if not rays_out:
        zi = np.zeros(0, dtype=np.int64)
        return zi, zi.copy(), np.zeros(0), np.zeros(0), np.zeros((0, 3)), np.zeros(0, dtype=bool)
    return (np.concatenate(rays_out).astype(np.int64), np.concatenate(surf_out),
            np.concatenate(t_out), np.concatenate(dp_out),
            np.concatenate(pos_out), np.concatenate(graz_out))


def first_hits(surfaces, origins: np.ndarray, dirs: np.ndarray, t_max: float,
               delta: float, min_t: float = 0.0):
    """Earliest hit per ray, or surface -1 where nothing was hit.

    Returns (surface (R,) int64, t (R,), position (R,3)).  Ties at equal t
    resolve to the lowest surface index.
    """
    r = origins.shape[0]
    ray, surf, t, _dp, pos, _g = intersect_rays(surfaces, origins, dirs, t_max, delta, min_t)
    best_surf = np.full(r, EMPTY_SURFACE, dtype=np.int64)
    best_t = np.full(r, np.inf)
    best_pos = np.zeros((r, 3))
    if len(ray):
        order = np.lexsort((surf, t, ray))
        ray, surf, t, pos = ray[order], surf[order], t[order], pos[order]
        first = np.ones(len(ray), dtype=bool)
        first[1:] = ray[1:] != ray[:-1]
        ray, surf, t, pos = ray[first], surf[first], t[first], pos[first]
        best_surf[ray] = surf
        best_t[ray] = t
        best_pos[ray] = pos
    return best_surf, best_t, best_pos


def occluded(surfaces, origins: np.ndarray, dirs: np.ndarray, max_t: np.ndarray,
             min_t: float = 0.0) -> np.ndarray:
    """Any-hit query: True where some surface lies in (min_t, max_t) along
    the segment."""
    blocked = np.zeros(origins.shape[0], dtype=bool)
    for surf in surfaces:
        denom = dirs @ surf.n
        valid = np.abs(denom) > EPS_PARALLEL
        safe = np.where(valid, denom, 1.0)
        t = -((origins @ surf.n) + surf.k) / safe
        valid &= (t > min_t) & (t < max_t) & ~blocked
        if not valid.any():
            continue
        idx = np.nonzero(valid)[0]
        pts = origins[idx] + t[idx, None] * dirs[idx]
        if isinstance(surf, TriangleSurface):
            inside = _contained_triangle(surf, pts)
        else:
            inside = _contained_rect(surf, pts)
        blocked[idx[inside]] = True
    return blocked


def cast_view(scene: Scene, camera: Camera, config: SynthConfig | None = None,
              view_id: int = 0, ray_id_offset: int = 0) -> SampleBatch:
    """Cast one ray per pixel and build the view's sample batch.

    In "all" hit mode every masked intersection with t <= t_max becomes a
    sample; "earliest" keeps only the minimum-t one per ray.  Rays with no
    intersection get one empty-space sample at t_max (zero density,
    background colour) unless empty_space is "omit".  Duplicate hits at
    identical t keep the lowest surface index.
    """
    cfg = config if config is not None else scene.config
    origins, dirs = camera.ray_grid()
    ray, surf, t, dp, pos, graz = intersect_rays(
        scene.surfaces, origins, dirs, cfg.t_max, cfg.delta)

    if len(ray):
        order = np.lexsort((surf, t, ray))
        ray, surf, t, dp, pos, graz = (a[order] for a in (ray, surf, t, dp, pos, graz))
        dup = np.zeros(len(ray), dtype=bool)
        dup[1:] = (ray[1:] == ray[:-1]) & (t[1:] == t[:-1])
        if dup.any():
            log.warning("view %d: dropped %d duplicate hit(s) at identical t "
                        "(kept lowest surface index)", view_id, int(dup.sum()))
            keep = ~dup
            ray, surf, t, dp, pos, graz = (a[keep] for a in (ray, surf, t, dp, pos, graz))
        if cfg.hit_mode == "earliest":
            first = np.ones(len(ray), dtype=bool)
            first[1:] = ray[1:] != ray[:-1]
            ray, surf, t, dp, pos, graz = (a[first] for a in (ray, surf, t, dp, pos, graz))

    if graz.any():
        log.warning("view %d: %d grazing-incidence sample(s), thickness clamped",
                    view_id, int(graz.sum()))

    albedo = np.array([m.albedo for m in
                       (scene.material_of(i) for i in range(len(scene.surfaces)))])
    density = np.array([scene.material_of(i).density for i in range(len(scene.surfaces))])
    colour = albedo[surf] if len(ray) else np.zeros((0, 3))
    dens = density[surf] if len(ray) else np.zeros(0)
    direction = dirs[ray]
    is_empty = np.zeros(len(ray), dtype=bool)

    if cfg.empty_space == "far-bound-sample":
        hit_rays = np.zeros(origins.shape[0], dtype=bool)
        hit_rays[ray] = True
        miss = np.nonzero(~hit_rays)[0]
        if len(miss):
            ray = np.concatenate([ray, miss])
            surf = np.concatenate([surf, np.full(len(miss), EMPTY_SURFACE, dtype=np.int64)])
            t = np.concatenate([t, np.full(len(miss), cfg.t_max)])
            dp = np.concatenate([dp, np.full(len(miss), cfg.delta)])
            pos = np.concatenate([pos, origins[miss] + cfg.t_max * dirs[miss]])
            colour = np.concatenate([colour, np.tile(np.array(cfg.background), (len(miss), 1))])
            dens = np.concatenate([dens, np.zeros(len(miss))])
            direction = np.concatenate([direction, dirs[miss]])
            is_empty = np.concatenate([is_empty, np.ones(len(miss), dtype=bool)])
            graz = np.concatenate([graz, np.zeros(len(miss), dtype=bool)])
            order = np.lexsort((t, ray))
            ray, surf, t, dp, pos, colour, dens, direction, is_empty, graz = (
                a[order] for a in (ray, surf, t, dp, pos, colour, dens, direction,
                                   is_empty, graz))

    if len(ray) == 0:
        return _empty_batch()
    return SampleBatch(ray=ray + ray_id_offset, surface=surf, t=t, delta_prime=dp,
                       position=pos, direction=direction, colour=colour, density=dens,
                       is_empty=is_empty, grazing=graz)


@dataclass(frozen=True)
class ViewInfo:
    """Per-view metadata carried alongside the flat sample arrays."""

    view_id: int
    height: int
    width: int
    fov_deg: float
    pose: np.ndarray  # 4x4 world-from-camera
    role: str
    ray_offset: int   # first global ray id of this view

    @property
    def ray_count(self) -> int:
        return self.height * self.width


@dataclass(eq=False)
class ExplicitField:
    """Flat, (ray, t)-sorted sample arrays plus the ray and view tables.

    Ray ids are global and stable: splits keep the original ids so that
    sample identity survives partitioning.
    """

    ray_ids: np.ndarray         # (R,) int64
    ray_origins: np.ndarray     # (R,3)
    ray_directions: np.ndarray  # (R,3)
    ray_views: np.ndarray       # (R,) int64
    views: tuple[ViewInfo, ...]
    sample_ray: np.ndarray      # (N,) int64, global ray ids
    sample_view: np.ndarray     # (N,) int64
    sample_surface: np.ndarray  # (N,) int64
    sample_t: np.ndarray
    sample_delta_prime: np.ndarray
    sample_position: np.ndarray
    sample_direction: np.ndarray
    sample_colour: np.ndarray
    sample_density: np.ndarray
    sample_is_empty: np.ndarray
    config: SynthConfig
    surface_count: int
    scene_hash: str | None = None

    @property
    def n_pts(self) -> int:
        return int(self.sample_ray.shape[0])

    @property
    def ray_count(self) -> int:
        return int(self.ray_ids.shape[0])

    def view_ids(self) -> list[int]:
        return [v.view_id for v in self.views]

    def view_info(self, view_id: int) -> ViewInfo:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise KeyError(f"view {view_id} not in field")

    def rays_of_view(self, view_id: int) -> np.ndarray:
        return self.ray_ids[self.ray_views == view_id]

    def samples_of_ray(self, ray_id: int) -> slice:
        lo = int(np.searchsorted(self.sample_ray, ray_id, side="left"))
        hi = int(np.searchsorted(self.sample_ray, ray_id, side="right"))
        return slice(lo, hi)

    def ray_samples(self, ray_id: int) -> list[RaySample]:
        s = self.samples_of_ray(ray_id)
        return SampleBatch(ray=self.sample_ray[s], surface=self.sample_surface[s],
                           t=self.sample_t[s], delta_prime=self.sample_delta_prime[s],
                           position=self.sample_position[s],
                           direction=self.sample_direction[s],
                           colour=self.sample_colour[s], density=self.sample_density[s],
                           is_empty=self.sample_is_empty[s],
                           grazing=np.zeros(s.stop - s.start, dtype=bool)).samples()

    def with_colours(self, colours: np.ndarray) -> "ExplicitField":
        colours = np.asarray(colours, dtype=np.float64)
        if colours.shape != self.sample_colour.shape:
            raise ValueError("replacement colour array has wrong shape")
        return replace(self, sample_colour=colours)

    def with_values(self, param: str, values: np.ndarray) -> "ExplicitField":
        """Copy with one learnable parameter column replaced (for rendering
        predicted fields)."""
        values = np.asarray(values, dtype=np.float64)
        if param == "colour":
            return self.with_colours(values)
        if param == "density":
            if values.shape != self.sample_density.shape:
                raise ValueError("replacement density array has wrong shape")
            return replace(self, sample_density=values)
        if param == "depth":
            if values.shape != self.sample_t.shape:
                raise ValueError("replacement depth array has wrong shape")
            return replace(self, sample_t=values)
        if param == "delta":
            if values.shape != self.sample_delta_prime.shape:
                raise ValueError("replacement delta array has wrong shape")
            return replace(self, sample_delta_prime=values)
        raise ValueError(f"unknown parameter {param!r}")

    def subset_by_rays(self, ray_ids: np.ndarray) -> "ExplicitField":
        """Field restricted to the given global ray ids (order-insensitive)."""
        wanted = np.unique(np.asarray(ray_ids, dtype=np.int64))
        ray_keep = np.isin(self.ray_ids, wanted)
        sample_keep = np.isin(self.sample_ray, wanted)
        return replace(self,
                       ray_ids=self.ray_ids[ray_keep],
                       ray_origins=self.ray_origins[ray_keep],
                       ray_directions=self.ray_directions[ray_keep],
                       ray_views=self.ray_views[ray_keep],
                       sample_ray=self.sample_ray[sample_keep],
                       sample_view=self.sample_view[sample_keep],
                       sample_surface=self.sample_surface[sample_keep],
                       sample_t=self.sample_t[sample_keep],
                       sample_delta_prime=self.sample_delta_prime[sample_keep],
                       sample_position=self.sample_position[sample_keep],
                       sample_direction=self.sample_direction[sample_keep],
                       sample_colour=self.sample_colour[sample_keep],
                       sample_density=self.sample_density[sample_keep],
                       sample_is_empty=self.sample_is_empty[sample_keep])

    def sample_keys(self) -> set[tuple]:
        """Identity keys for set-algebra checks over samples."""
        return {(int(r), int(s), float(t)) for r, s, t in
                zip(self.sample_ray, self.sample_surface, self.sample_t)}


def generate_field(scene: Scene, cameras: list[Camera] | None = None,
                   config: SynthConfig | None = None,
                   scene_hash: str | None = None) -> ExplicitField:
    """Cast every camera and assemble the field.

    View ids follow camera list order; global ray ids are contiguous per
    view in row-major pixel order, so the concatenated samples arrive
    already sorted by (ray, t).
    """
    cams = cameras if cameras is not None else scene.cameras
    if not cams:
        raise SceneValidationError("generate_field requires at least one camera")
    cfg = config if config is not None else scene.config

    views = []
    batches = []
    ray_origins = []
    ray_dirs = []
    ray_views = []
    offset = 0
    for vid, cam in enumerate(cams):
        views.append(ViewInfo(view_id=vid, height=cam.height, width=cam.width,
                              fov_deg=cam.fov_deg, pose=cam.pose.copy(), role=cam.role,
                              ray_offset=offset))
        batches.append(cast_view(scene, cam, cfg, view_id=vid, ray_id_offset=offset))
        o, d = cam.ray_grid()
        ray_origins.append(o)
        ray_dirs.append(d)
        ray_views.append(np.full(cam.ray_count, vid, dtype=np.int64))
        offset += cam.ray_count

    sample_ray = np.concatenate([b.ray for b in batches])
    offsets = np.array([v.ray_offset for v in views], dtype=np.int64)
    sample_view = np.searchsorted(offsets, sample_ray, side="right") - 1
    return ExplicitField(
        ray_ids=np.arange(offset, dtype=np.int64),
        ray_origins=np.concatenate(ray_origins),
        ray_directions=np.concatenate(ray_dirs),
        ray_views=np.concatenate(ray_views),
        views=tuple(views),
        sample_ray=sample_ray,
        sample_view=sample_view.astype(np.int64),
        sample_surface=np.concatenate([b.surface for b in batches]),
        sample_t=np.concatenate([b.t for b in batches]),
        sample_delta_prime=np.concatenate([b.delta_prime for b in batches]),
        sample_position=np.concatenate([b.position for b in batches]),
        sample_direction=np.concatenate([b.direction for b in batches]),
        sample_colour=np.concatenate([b.colour for b in batches]),
        sample_density=np.concatenate([b.density for b in batches]),
        sample_is_empty=np.concatenate([b.is_empty for b in batches]),
        config=cfg,
        surface_count=len(scene.surfaces),
        scene_hash=scene_hash,
    )


def split_train_novel(field: ExplicitField, fraction: float | None = None,
                      seed: int = 0, train_views: list[int] | None = None,
                      novel_views: list[int] | None = None
                      ) -> tuple[ExplicitField, ExplicitField]:
    """Partition a field's rays into train and novel sub-fields.

    Two modes:
      * per-view: train_views / novel_views give a disjoint cover of the
        field's views, and whole views go to each side;
      * per-ray fraction within shared views: each view's rays are split
        by the given fraction (stratified per view, seeded, deterministic).

    The two sub-fields are disjoint and their union is the input.
    """
    if fraction is not None and (train_views is not None or novel_views is not None):
        raise ValueError("give either a fraction or a view partition, not both")

    if fraction is not None:
        if not (0.0 < fraction < 1.0):
            raise ValueError("split fraction must lie in (0, 1)")
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), STREAM_SPLIT]))
        train_ids = []
        novel_ids = []
        for v in field.views:
            rays = field.rays_of_view(v.view_id)
            if len(rays) == 0:
                continue
            perm = rng.permutation(len(rays))
            n_train = int(round(fraction * len(rays)))
            train_ids.append(rays[perm[:n_train]])
            novel_ids.append(rays[perm[n_train:]])
        train_ids = np.concatenate(train_ids) if train_ids else np.zeros(0, dtype=np.int64)
        novel_ids = np.concatenate(novel_ids) if novel_ids else np.zeros(0, dtype=np.int64)
        return field.subset_by_rays(train_ids), field.subset_by_rays(novel_ids)

    if train_views is None or novel_views is None:
        raise ValueError("per-view split needs both train_views and novel_views")
    train_set = set(int(v) for v in train_views)
    novel_set = set(int(v) for v in novel_views)
    all_views = set(field.view_ids())
    if train_set & novel_set:
        raise ValueError("train and novel views overlap")
    if train_set | novel_set != all_views:
        raise ValueError("view partition must cover every view in the field")
    train_ids = field.ray_ids[np.isin(field.ray_views, sorted(train_set))]
    novel_ids = field.ray_ids[np.isin(field.ray_views, sorted(novel_set))]
    return field.subset_by_rays(train_ids), field.subset_by_rays(novel_ids)

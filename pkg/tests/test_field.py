"""Field synthesis tests: casting, hit modes, empty space, splits."""

import numpy as np
import pytest

from rayfield.field import (EMPTY_SURFACE, cast_view, generate_field,
                            intersect_rays, split_train_novel)
from rayfield.geometry import Ray, intersect_surface
from rayfield.scene import SynthConfig

from helpers import (empty_scene, identity_camera, single_triangle_scene,
                     three_cuboid_scene)


def test_single_facing_triangle_one_sample():
    scene = single_triangle_scene()
    batch = cast_view(scene, scene.cameras[0])
    assert len(batch) == 1
    s = batch.samples()[0]
    assert s.t == pytest.approx(2.0, abs=1e-12)
    assert s.density == 1.0
    assert np.allclose(s.colour, (1.0, 1.0, 1.0))
    assert not s.is_empty_space
    # perpendicular incidence keeps the base thickness
    assert s.delta_prime == pytest.approx(scene.config.delta, abs=1e-15)


def test_empty_scene_far_bound_samples():
    scene = empty_scene(height=2, width=2, t_max=1000.0)
    batch = cast_view(scene, scene.cameras[0])
    assert len(batch) == 4
    assert np.all(batch.is_empty)
    assert np.all(batch.density == 0.0)
    assert np.all(batch.t == 1000.0)


def test_empty_space_omit_mode():
    scene = empty_scene(height=2, width=2, empty_space="omit")
    batch = cast_view(scene, scene.cameras[0])
    assert len(batch) == 0


def test_earliest_hit_matches_min_over_all_hits():
    scene = three_cuboid_scene(height=24, width=24)
    cam = scene.cameras[0]
    all_cfg = SynthConfig(t_max=100.0, hit_mode="all")
    earliest_cfg = SynthConfig(t_max=100.0, hit_mode="earliest")
    full = cast_view(scene, cam, all_cfg)
    first = cast_view(scene, cam, earliest_cfg)

    # brute-force oracle: group the all-hits batch per ray, take min t
    expected = {}
    for i in range(len(full)):
        r = int(full.ray[i])
        if full.is_empty[i]:
            expected.setdefault(r, (full.t[i], EMPTY_SURFACE))
            continue
        t = float(full.t[i])
        if r not in expected or t < expected[r][0]:
            expected[r] = (t, int(full.surface[i]))
    assert len(first) == len(expected)
    for i in range(len(first)):
        r = int(first.ray[i])
        t, surf = expected[r]
        assert first.t[i] == pytest.approx(t, abs=0.0)
        assert int(first.surface[i]) == surf


def test_earliest_field_subset_of_all_hits():
    scene = three_cuboid_scene(height=16, width=16)
    full = generate_field(scene, config=SynthConfig(t_max=100.0, hit_mode="all"))
    first = generate_field(scene, config=SynthConfig(t_max=100.0, hit_mode="earliest"))
    assert first.sample_keys() <= full.sample_keys()
    assert first.n_pts <= full.n_pts


def test_vectorized_cast_matches_scalar_kernels():
    scene = three_cuboid_scene(height=8, width=8)
    cam = scene.cameras[1]
    origins, dirs = cam.ray_grid()
    ray, surf, t, _dp, _pos, _gz = intersect_rays(
        scene.surfaces, origins, dirs, 100.0, 0.001)
    got = {(int(r), int(s), round(float(tt), 12)) for r, s, tt in zip(ray, surf, t)}
    want = set()
    for r in range(origins.shape[0]):
        rr = Ray(origin=origins[r], direction=dirs[r])
        for si, surface in enumerate(scene.surfaces):
            hit = intersect_surface(rr, surface, t_max=100.0, surface_id=si)
            if hit is not None:
                want.add((r, si, round(hit.t, 12)))
    assert got == want


def test_per_ray_samples_strictly_increasing():
    scene = three_cuboid_scene(height=12, width=12, hit_mode="all")
    field = generate_field(scene)
    same_ray = field.sample_ray[1:] == field.sample_ray[:-1]
    assert np.all(field.sample_t[1:][same_ray] > field.sample_t[:-1][same_ray])


def test_sample_positions_satisfy_plug_back():
    scene = three_cuboid_scene(height=10, width=10, hit_mode="all")
    field = generate_field(scene)
    real = ~field.sample_is_empty
    for i in np.nonzero(real)[0][:500]:
        surf = scene.surfaces[int(field.sample_surface[i])]
        residual = abs(float(field.sample_position[i] @ surf.n) + surf.k)
        assert residual < 1e-9


def test_conservation_of_sample_count():
    scene = three_cuboid_scene(height=12, width=12, hit_mode="all")
    cam = scene.cameras[0]
    origins, dirs = cam.ray_grid()
    ray, _s, _t, _dp, _p, _g = intersect_rays(scene.surfaces, origins, dirs, 100.0, 0.001)
    hit_rays = np.unique(ray)
    empty_rays = origins.shape[0] - len(hit_rays)
    batch = cast_view(scene, cam)
    assert len(batch) == len(ray) + empty_rays


def test_generate_field_camera_permutation_invariance():
    scene = three_cuboid_scene(height=8, width=8)
    f1 = generate_field(scene, cameras=scene.cameras)
    f2 = generate_field(scene, cameras=scene.cameras[::-1])

    def id_free_keys(field):
        keys = []
        for i in range(field.n_pts):
            r = int(field.sample_ray[i])
            pos = field.ray_origins[np.searchsorted(field.ray_ids, r)]
            d = field.ray_directions[np.searchsorted(field.ray_ids, r)]
            keys.append((tuple(np.round(pos, 12)), tuple(np.round(d, 12)),
                         round(float(field.sample_t[i]), 12), int(field.sample_surface[i])))
        return sorted(keys)

    assert id_free_keys(f1) == id_free_keys(f2)


def test_single_rect_filling_frustum_n_pts_equals_pixels():
    from rayfield.scene import Material, Scene
    from rayfield.geometry import RectSurface
    rect = RectSurface.from_corner_edges((-50, -50, -2), (100, 0, 0), (0, 100, 0),
                                         material_id="m")
    scene = Scene(surfaces=[rect], materials={"m": Material(albedo=(1, 1, 1))},
                  cameras=[identity_camera(9, 7)])
    field = generate_field(scene)
    assert field.n_pts == 9 * 7
    assert not field.sample_is_empty.any()


def test_split_fraction_counts_and_disjointness():
    scene = three_cuboid_scene(height=10, width=10)
    field = generate_field(scene)
    train, novel = split_train_novel(field, fraction=0.8, seed=42)
    assert train.ray_count + novel.ray_count == field.ray_count
    for v in field.views:
        n = v.ray_count
        assert len(train.rays_of_view(v.view_id)) == round(0.8 * n)
    assert not (set(train.ray_ids) & set(novel.ray_ids))
    assert train.sample_keys().isdisjoint(novel.sample_keys())
    assert train.sample_keys() | novel.sample_keys() == field.sample_keys()


def test_split_fraction_deterministic():
    scene = three_cuboid_scene(height=8, width=8)
    field = generate_field(scene)
    t1, n1 = split_train_novel(field, fraction=0.8, seed=7)
    t2, n2 = split_train_novel(field, fraction=0.8, seed=7)
    assert np.array_equal(t1.ray_ids, t2.ray_ids)
    assert np.array_equal(n1.ray_ids, n2.ray_ids)
    t3, _ = split_train_novel(field, fraction=0.8, seed=8)
    assert not np.array_equal(t1.ray_ids, t3.ray_ids)


def test_split_fraction_validation():
    scene = single_triangle_scene()
    field = generate_field(scene)
    with pytest.raises(ValueError):
        split_train_novel(field, fraction=1.2)
    with pytest.raises(ValueError):
        split_train_novel(field, fraction=0.0)


def test_split_by_views():
    scene = three_cuboid_scene(height=6, width=6, extra_novel=True)
    field = generate_field(scene)
    train, novel = split_train_novel(field, train_views=[0, 1, 2],
                                     novel_views=[3, 4, 5])
    assert set(train.ray_views) == {0, 1, 2}
    assert set(novel.ray_views) == {3, 4, 5}
    assert train.sample_keys() | novel.sample_keys() == field.sample_keys()
    with pytest.raises(ValueError):
        split_train_novel(field, train_views=[0, 1], novel_views=[1, 2])
    with pytest.raises(ValueError):
        split_train_novel(field, train_views=[0], novel_views=[1, 2])


def test_n_pts_counts_empty_space_samples():
    scene = three_cuboid_scene(height=10, width=10)
    field = generate_field(scene)
    assert field.n_pts == 3 * 10 * 10  # earliest-hit: exactly one sample per ray
    assert field.sample_is_empty.any()

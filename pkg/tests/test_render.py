"""Volume compositing tests against a literal term-by-term expansion."""

import math

import numpy as np
import pytest

from rayfield.field import RaySample, generate_field
from rayfield.render import (Image, composite_ray, read_float_image, read_png,
                             render_view, write_float_image, write_png)
from rayfield.shading import apply_shaders

from helpers import empty_scene, lit_box_scene, single_triangle_scene


def sample(t, density, delta_prime=0.001, colour=(1.0, 1.0, 1.0)):
    return RaySample(ray_index=0, surface_index=0, t=t, delta_prime=delta_prime,
                     position=np.zeros(3), direction=np.array([0.0, 0.0, -1.0]),
                     colour=np.array(colour, dtype=np.float64), density=density)


def eq_oracle(samples, mode):
    """Literal expansion: C = sum_i exp(-sum_{j<i} sigma_j dp_j) * alpha_i * c_i."""
    c = np.zeros(3)
    for i, s in enumerate(samples):
        transmittance = math.exp(-sum(samples[j].density * samples[j].delta_prime
                                      for j in range(i)))
        if mode == "standard":
            alpha = 1.0 - math.exp(-s.density * s.delta_prime)
        else:
            alpha = 1.0 - math.exp(-s.density)
        c = c + transmittance * alpha * np.asarray(s.colour)
    return np.clip(c, 0.0, 1.0)


def random_ray_samples(rng, max_samples=8):
    n = int(rng.integers(1, max_samples + 1))
    ts = np.sort(rng.uniform(0.1, 50.0, n))
    return [sample(t=float(ts[i]), density=float(rng.uniform(0.0, 1.0)),
                   delta_prime=float(rng.uniform(0.001, 2.0)),
                   colour=rng.uniform(0.0, 1.0, 3)) for i in range(n)]


def test_all_zero_density_is_black():
    samples = [sample(t, 0.0, colour=(0.9, 0.4, 0.2)) for t in (1.0, 2.0, 3.0)]
    for mode in ("standard", "modified"):
        assert np.allclose(composite_ray(samples, mode), (0.0, 0.0, 0.0))


def test_opaque_limit_single_sample():
    s = [sample(1.0, 50.0, delta_prime=1.0, colour=(0.3, 0.6, 0.9))]
    for mode in ("standard", "modified"):
        assert np.allclose(composite_ray(s, mode), (0.3, 0.6, 0.9), atol=1e-6)


def test_opaque_first_sample_hides_rest():
    first = sample(1.0, 50.0, delta_prime=1.0, colour=(0.1, 0.2, 0.3))
    rest = [sample(2.0, 1.0, 1.0, (1.0, 1.0, 1.0)),
            sample(3.0, 0.7, 0.5, (1.0, 0.0, 0.0))]
    for mode in ("standard", "modified"):
        assert np.allclose(composite_ray([first] + rest, mode), (0.1, 0.2, 0.3),
                           atol=1e-6)


def test_two_sample_hand_expansion_modified():
    c1 = np.array([0.8, 0.1, 0.2])
    c2 = np.array([0.1, 0.9, 0.5])
    samples = [sample(1.0, 1.0, 0.001, c1), sample(2.0, 1.0, 0.001, c2)]
    expected = (1.0 - math.exp(-1.0)) * c1 + math.exp(-0.001) * (1.0 - math.exp(-1.0)) * c2
    assert np.allclose(composite_ray(samples, "modified"), expected, atol=1e-15)


def test_matches_literal_expansion_on_random_rays():
    rng = np.random.default_rng(31)
    for _ in range(300):
        samples = random_ray_samples(rng)
        for mode in ("standard", "modified"):
            got = composite_ray(samples, mode)
            assert np.max(np.abs(got - eq_oracle(samples, mode))) < 1e-12


def test_zero_density_insertion_invariance():
    rng = np.random.default_rng(13)
    for _ in range(100):
        samples = random_ray_samples(rng)
        k = int(rng.integers(0, len(samples) + 1))
        t_ins = (samples[k - 1].t + 0.01) if k else samples[0].t / 2.0
        inserted = samples[:k] + [sample(t_ins, 0.0, colour=rng.uniform(0, 1, 3))] \
            + samples[k:]
        for mode in ("standard", "modified"):
            assert np.allclose(composite_ray(samples, mode),
                               composite_ray(inserted, mode), atol=1e-15)


def test_transmittance_non_increasing():
    rng = np.random.default_rng(19)
    for _ in range(100):
        samples = random_ray_samples(rng)
        tau = np.array([s.density * s.delta_prime for s in samples])
        transmittance = np.exp(-(np.cumsum(tau) - tau))
        assert np.all(np.diff(transmittance) <= 1e-15)


def test_modes_agree_when_thickness_is_one():
    rng = np.random.default_rng(37)
    for _ in range(50):
        samples = [sample(float(t), float(rng.uniform(0, 1)), 1.0,
                          rng.uniform(0, 1, 3))
                   for t in np.sort(rng.uniform(0.1, 10, 4))]
        assert np.allclose(composite_ray(samples, "standard"),
                           composite_ray(samples, "modified"), atol=1e-15)


def test_unsorted_input_rejected():
    samples = [sample(2.0, 0.5), sample(1.0, 0.5)]
    with pytest.raises(ValueError):
        composite_ray(samples)


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        composite_ray([sample(1.0, 1.0)], "fancy")


# ---------------------------------------------------------------------------
# render_view


def test_empty_scene_renders_uniform_black():
    scene = empty_scene(height=4, width=4)
    field = generate_field(scene)
    image = render_view(field, 0)
    assert np.allclose(image.pixels, 0.0)


def test_render_view_equals_per_pixel_composites():
    scene = lit_box_scene(height=8, width=8, reflective=True)
    field = apply_shaders(generate_field(scene), scene)
    for mode in ("standard", "modified"):
        image = render_view(field, 0, mode)
        info = field.views[0]
        for ray_id in range(info.ray_count):
            row, col = divmod(ray_id, info.width)
            expected = composite_ray(field.ray_samples(ray_id), mode)
            assert np.allclose(image.pixels[row, col], expected, atol=1e-12)


def test_opaque_full_frame_rect_renders_white():
    # drive the opacity into its saturating regime so the composed identity
    # (white albedo in, white image out) holds to 1e-6
    scene = single_triangle_scene(height=4, width=4)
    field = generate_field(scene)
    field = field.with_values("density", np.full(field.n_pts, 50.0))
    field = field.with_values("delta", np.ones(field.n_pts))
    image = render_view(field, 0, "modified")
    assert np.allclose(image.pixels, 1.0, atol=1e-6)


def test_render_deterministic():
    scene = lit_box_scene(height=6, width=6)
    field = apply_shaders(generate_field(scene), scene)
    a = render_view(field, 0, "modified")
    b = render_view(field, 0, "modified")
    assert np.array_equal(a.pixels, b.pixels)


# ---------------------------------------------------------------------------
# image I/O


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    pixels = np.round(rng.uniform(0, 1, (9, 7, 3)) * 255) / 255.0
    image = Image(width=7, height=9, pixels=pixels)
    write_png(image, tmp_path / "img.png")
    back = read_png(tmp_path / "img.png")
    assert np.allclose(back.pixels, pixels, atol=1e-12)


def test_float_image_round_trip_exact(tmp_path):
    rng = np.random.default_rng(6)
    pixels = rng.uniform(0, 1, (5, 8, 3)).astype(np.float32).astype(np.float64)
    image = Image(width=8, height=5, pixels=pixels)
    write_float_image(image, tmp_path / "img.f32")
    back = read_float_image(tmp_path / "img.f32")
    assert np.array_equal(back.pixels, pixels)


def test_float_image_detects_corruption(tmp_path):
    image = Image(width=2, height=2, pixels=np.zeros((2, 2, 3)))
    write_float_image(image, tmp_path / "img.f32")
    raw = (tmp_path / "img.f32").read_bytes()
    (tmp_path / "img.f32").write_bytes(raw[:-2] + b"xx")
    with pytest.raises(ValueError):
        read_float_image(tmp_path / "img.f32")


def test_image_validates_range():
    with pytest.raises(ValueError):
        Image(width=1, height=1, pixels=np.array([[[1.5, 0.0, 0.0]]]))

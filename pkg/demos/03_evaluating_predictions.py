"""
Scoring predictions against exact ground truth
==============================================

The parametric error (per-view mean absolute error of a learnable
parameter) evaluates predictions sample-by-sample, without an image in
between.  This demo fakes three "networks" of different quality by
perturbing the ground truth, then scores them parametrically and with
image metrics.
"""

import numpy as np

from rayfield import (Camera, LightSource, Material, MetricReport,
                      PredictionSet, Scene, SynthConfig, build_primitive,
                      depth_psnr, generate_field, psnr, render_view, ssim,
                      wape)


def translate(x, y, z, scale=1.0):
    t = np.eye(4) * scale
    t[3, 3] = 1.0
    t[:3, 3] = (x, y, z)
    return t


# Three boxes watched by three neighbouring views; earliest-hit sampling
# turns the field into a per-ray depth representation.
surfaces = (build_primitive("box", transform=translate(-2.0, 0.0, -8.0)) +
            build_primitive("box", transform=translate(0.0, 0.5, -10.0)) +
            build_primitive("box", transform=translate(2.2, -0.3, -9.0)))
cameras = [Camera.look_at(eye, (0.0, 0.0, -9.0), fov_deg=45.0,
                          height=64, width=64)
           for eye in ((-1.5, 0.0, 0.0), (0.0, 0.3, 1.0), (1.5, -0.2, 0.5))]
scene = Scene(surfaces=surfaces, materials={"default": Material(albedo=(1, 1, 1))},
              cameras=cameras,
              config=SynthConfig(t_max=100.0, hit_mode="earliest"))
field = generate_field(scene)
print(f"reference field: {field.n_pts} samples over {len(field.views)} views\n")

rng = np.random.default_rng(0)
fake_networks = {
    "sharp": field.sample_t + rng.normal(0.0, 0.05, field.n_pts),
    "blurry": field.sample_t + rng.normal(0.0, 0.8, field.n_pts),
    "biased": field.sample_t + 2.0,
}

print(f"{'model':>8}  {'wape (mean +/- std)':>24}  {'depth psnr':>12}")
for name, values in fake_networks.items():
    pred = PredictionSet(param="depth", values=values)
    w = wape(pred, field)
    p = depth_psnr(pred, field)
    print(f"{name:>8}  {w.mean:12.4f} +/- {w.std:7.4f}  {p.mean:10.1f} dB")

# Image-space metrics compare renders of the ground-truth field against a
# field whose parameter column is replaced by the predictions.
print("\nimage metrics for a perturbed-colour field:")
wall = build_primitive("plane", transform=translate(0, 0, -9, scale=12.0),
                       as_rect=True, material_id="wall")
colour_scene = Scene(
    surfaces=build_primitive("box", transform=translate(0, 0, -4)) + wall,
    materials={"default": Material(albedo=(0.9, 0.6, 0.1)),
               "wall": Material(albedo=(0.2, 0.3, 0.8))},
    lights=[LightSource(position=(2.0, 3.0, 0.0), intensity=1.0)],
    cameras=[Camera(np.eye(4), fov_deg=50.0, height=64, width=64)],
    config=SynthConfig(t_max=100.0))
colour_field = generate_field(colour_scene)
noisy = np.clip(colour_field.sample_colour +
                rng.normal(0, 0.1, (colour_field.n_pts, 3)), 0, 1)
predicted_field = colour_field.with_values("colour", noisy)

gt_img = render_view(colour_field, 0)
pred_img = render_view(predicted_field, 0)
report = MetricReport.from_views("psnr", [0], [psnr(gt_img, pred_img)])
print(f"  psnr: {report.mean:.2f} dB   ssim: {ssim(gt_img, pred_img):.4f}")

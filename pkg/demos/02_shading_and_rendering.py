"""
Shading a field and rendering reference views
=============================================

Applies the Lambertian diffuse shader (with shadow rays) and the mirror
reflection shader for glass, then composites the samples into images under
both opacity rules.  PNGs land in demos/output/.
"""

from pathlib import Path

import numpy as np

from rayfield import (Camera, LightSource, Material, Scene, ShaderSpec,
                      SynthConfig, build_primitive, generate_field,
                      render_view, shade_diffuse, shade_reflection, write_png)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def translate(x, y, z, scale=1.0):
    t = np.eye(4) * scale
    t[3, 3] = 1.0
    t[:3, 3] = (x, y, z)
    return t


# An orange box on the left, a glass box on the right, a blue backdrop.
surfaces = (build_primitive("box", transform=translate(-1.2, 0.0, -4.5),
                            material_id="solid") +
            build_primitive("box", transform=translate(1.2, 0.0, -4.5),
                            material_id="glass") +
            [build_primitive("plane", transform=translate(0, 0, -9, scale=30.0),
                             as_rect=True, material_id="wall")[0]])

scene = Scene(
    surfaces=surfaces,
    materials={"solid": Material(albedo=(0.9, 0.5, 0.1)),
               "glass": Material(albedo=(0.3, 0.3, 0.9), density=0.5,
                                 glass=True, reflectance=0.7),
               "wall": Material(albedo=(0.25, 0.35, 0.85))},
    lights=[LightSource(position=(3.0, 4.0, 1.0), intensity=1.0, radius=0.3)],
    cameras=[Camera(np.eye(4), fov_deg=55.0, height=160, width=160)],
    config=SynthConfig(t_max=100.0, hit_mode="all"),
)

field = generate_field(scene)
print(f"cast {field.n_pts} samples")

# Diffuse pass: c = albedo * mean_k(I_eff * max(0, n.l) * visibility).
# Glass-like materials receive half the light intensity of solids.
diffuse = ShaderSpec(kind="diffuse", light_samples=25, colour_range=255.0)
field = shade_diffuse(field, scene, spec=diffuse, seed=0)

# Reflection pass: glass samples bounce their view ray once and blend the
# diffusely shaded colour found at the bounce point.
reflection = ShaderSpec(kind="reflection", light_samples=1, trace_order=2,
                        colour_range=2.0)
field = shade_reflection(field, scene, spec=reflection, seed=0)

# The "modified" opacity rule drops the (tiny) thickness from the opacity
# exponent so thin analytic surfaces stay visible; transmittance keeps it.
for mode in ("modified", "standard"):
    image = render_view(field, 0, mode)
    write_png(image, OUT / f"shaded_{mode}.png")
    print(f"{mode:>8} opacity: mean pixel value {image.pixels.mean():.4f} "
          f"-> {OUT / f'shaded_{mode}.png'}")

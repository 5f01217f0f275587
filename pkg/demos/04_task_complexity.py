"""
Shader and task complexity accounting
=====================================

A shader pass costs (256 / colour_range) * light_samples * lights *
trace_order; task complexity multiplies the training sample count by the
accumulated shader cost and by how differently the train and novel rays
are spread in space.  Sampling train and novel rays from the same views
drives that last factor, and with it the whole score, to zero.
"""

import numpy as np

from rayfield import (Camera, Material, Scene, ShaderSpec, SynthConfig,
                      build_primitive, complexity_report, generate_field,
                      shader_complexity, split_train_novel)

# The canonical two-shader configuration: diffuse and glass passes at 25
# light samples over a 255-level colour range.
diffuse = ShaderSpec(kind="diffuse", light_samples=25, colour_range=255.0,
                     label="diffuse")
glass = ShaderSpec(kind="diffuse", light_samples=25, colour_range=255.0,
                   label="glass", targets="glass")
reflection = ShaderSpec(kind="reflection", light_samples=1, trace_order=2,
                        colour_range=2.0, label="reflection")

print(f"diffuse + glass:            {shader_complexity([diffuse, glass]):.3f}")
print(f"adding the reflection pass: "
      f"{shader_complexity([diffuse, glass, reflection]):.3f}")
print("(the reflection entry is dominated by its tiny colour range: "
      f"256/2 * 1 * 2 = {shader_complexity([reflection]):.0f})\n")


def translate(x, y, z):
    t = np.eye(4)
    t[:3, 3] = (x, y, z)
    return t


# A scene with three training views and three novel views placed elsewhere.
surfaces = (build_primitive("box", transform=translate(-2.0, 0.0, -8.0)) +
            build_primitive("box", transform=translate(0.0, 0.5, -10.0)) +
            build_primitive("box", transform=translate(2.2, -0.3, -9.0)))
train_eyes = ((-1.5, 0.0, 0.0), (0.0, 0.3, 1.0), (1.5, -0.2, 0.5))
novel_eyes = ((-3.5, 1.0, 2.0), (0.5, -1.5, 3.0), (4.0, 0.8, 1.5))
cameras = ([Camera.look_at(e, (0, 0, -9.0), fov_deg=45.0, height=50, width=50)
            for e in train_eyes] +
           [Camera.look_at(e, (0, 0, -9.0), fov_deg=45.0, height=50, width=50,
                           role="novel") for e in novel_eyes])
scene = Scene(surfaces=surfaces, materials={"default": Material(albedo=(1, 1, 1))},
              cameras=cameras, config=SynthConfig(t_max=100.0,
                                                  hit_mode="earliest"))
field = generate_field(scene)

# Novel views elsewhere: the ray-origin spreads differ, the task scores high.
train, novel = split_train_novel(field, train_views=[0, 1, 2],
                                 novel_views=[3, 4, 5])
across = complexity_report([diffuse, glass], train, novel, basis="origins")
print("novel views placed away from the training views:")
for line in across.lines():
    print("  " + line)

# Sampling both sets from the same three views (0.8 per-ray split) makes the
# train and novel spreads match, collapsing the score to ~0.
shared = field.subset_by_rays(field.ray_ids[np.isin(field.ray_views, [0, 1, 2])])
train_w, novel_w = split_train_novel(shared, fraction=0.8, seed=0)
within = complexity_report([diffuse, glass], train_w, novel_w, basis="origins")
print("\ntrain and novel rays drawn from the same views (0.8 split):")
print(f"  spread train = {within.std_train:.9f}, "
      f"novel = {within.std_novel:.9f}")
print(f"  task complexity = {within.task_complexity:.3e} "
      f"({within.task_complexity / across.task_complexity:.1e} of the "
      "novel-view setup)")

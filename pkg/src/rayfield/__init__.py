"""rayfield: exact radiance-field ground truth from mesh scenes.

Casts analytic rays against triangle/rectangle meshes to build explicit
per-ray volumetric samples, shades them with configurable ray tracers,
volume-renders reference views, and evaluates predictions with parametric
and image-space metrics plus a task-complexity score.
"""

from .complexity import (ComplexityReport, complexity_report, ray_position_std,
                         reference_shader_complexity, shader_complexity,
                         task_complexity)
from .field import (EMPTY_SURFACE, ExplicitField, RaySample, SampleBatch,
                    cast_view, generate_field, split_train_novel)
from .geometry import (DegenerateTriangleError, Hit, Ray, RectSurface,
                       TriangleSurface, barycentric, delta_prime,
                       intersect_rect, intersect_surface, intersect_triangle,
                       ray_plane_t, reflect)
from .metrics import (AlignmentError, MetricReport, PredictionSet, depth_psnr,
                      psnr, ssim, wape)
from .render import (Image, composite_ray, read_float_image, read_png,
                     render_view, write_float_image, write_png)
from .scene import (Camera, LightSource, Material, Scene, SceneValidationError,
                    ShaderSpec, SynthConfig, with_config)
from .sceneio import (DatasetError, build_primitive, export_dataset,
                      import_dataset, import_obj, import_predictions,
                      load_scene, read_manifest, save_predictions, save_scene,
                      scene_hash)
from .shading import (apply_shaders, quantize_colours, shade_diffuse,
                      shade_reflection)

__version__ = "0.1.0"

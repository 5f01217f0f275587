"""rayfield_adapter: training-loop bridge for rayfield dataset bundles.

Read/convert/score only: loads ground-truth bundles through the documented
file format, converts camera poses to common training conventions, writes
prediction dumps the evaluation CLI can score, and mirrors the WAPE
computation for per-epoch monitoring.  Geometry and shading stay in the
ground-truth toolkit; this package never re-implements them.
"""

from .bundle import (BundleError, LoadedBundle, ViewSlice, horizontal_fov_rad,
                     load_bundle, transforms_manifest)
from .monitor import WapeResult, wape_monitor
from .predictions import PredictionExportError, export_predictions

__version__ = "0.1.0"

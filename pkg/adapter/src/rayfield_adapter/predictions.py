"""Writing prediction dumps that the evaluation CLI can score.

The dump mirrors the dataset bundle layout: manifest.json plus raw
little-endian arrays (uint32 sample ids, float32 values), hashed for
corruption detection.  Rows may be written in any order as long as every
sample id appears exactly once.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

PREDICTIONS_FORMAT = "rayfield-predictions"
FORMAT_VERSION = 1
PARAMS = ("colour", "density", "depth", "delta")


class PredictionExportError(ValueError):
    """Prediction values cannot form a valid dump."""


def export_predictions(values, ids, param: str, scene_hash: str | None, out) -> Path:
    """Write a prediction dump; returns the output directory."""
    if param not in PARAMS:
        raise PredictionExportError(f"param must be one of {PARAMS}")
    values = np.asarray(values)
    ids = np.asarray(ids)
    if ids.ndim != 1:
        raise PredictionExportError("ids must be a flat array")
    if values.shape[0] != ids.shape[0]:
        raise PredictionExportError(
            f"values rows ({values.shape[0]}) do not match ids ({ids.shape[0]})")
    if param == "colour" and (values.ndim != 2 or values.shape[1] != 3):
        raise PredictionExportError("colour predictions must have shape (n, 3)")
    if param != "colour" and values.ndim != 1:
        raise PredictionExportError(f"{param} predictions must have shape (n,)")
    if not np.all(np.isfinite(values)):
        raise PredictionExportError("prediction values must be finite")

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    entries = {}
    for name, arr in (("ids", ids.astype("<u4")), ("values", values.astype("<f4"))):
        raw = arr.tobytes()
        (out / f"{name}.bin").write_bytes(raw)
        entries[name] = {"file": f"{name}.bin", "dtype": arr.dtype.str,
                         "shape": list(arr.shape),
                         "sha256": hashlib.sha256(raw).hexdigest()}
    manifest = {
        "format": PREDICTIONS_FORMAT,
        "version": FORMAT_VERSION,
        "endianness": "little",
        "param": param,
        "scene_hash": scene_hash,
        "sample_count": int(ids.shape[0]),
        "arrays": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True,
                                                  indent=2) + "\n")
    return out

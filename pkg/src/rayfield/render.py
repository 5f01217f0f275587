"""Volume compositing of per-ray samples into pixel colours.

Per ray with t-sorted samples the pixel colour is

    C = sum_i T_i * alpha_i * c_i,      T_i = exp(-sum_{j<i} sigma_j * dp_j)

where dp is the slant-corrected thickness.  Two opacity rules are
supported: "standard" uses alpha_i = 1 - exp(-sigma_i * dp_i); "modified"
drops the thickness from the opacity exponent (alpha_i = 1 - exp(-sigma_i))
while keeping it in the transmittance, which keeps thin analytic surfaces
visible.  T_1 = 1 (empty prefix sum) and the result is clamped to [0, 1].
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from PIL import Image as PILImage

from .field import ExplicitField

log = logging.getLogger("rayfield")

RenderMode = Literal["standard", "modified"]
RENDER_MODES = ("standard", "modified")


@dataclass(eq=False)
class Image:
    """Row-major RGB image with channels in [0, 1]."""

    width: int
    height: int
    pixels: np.ndarray  # (H, W, 3) float64

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(f"pixel array shape {self.pixels.shape} does not match "
                             f"{self.height}x{self.width}x3")
        if self.pixels.size and (self.pixels.min() < 0.0 or self.pixels.max() > 1.0):
            raise ValueError("pixel channels must lie in [0, 1]")


def _check_mode(mode: str) -> None:
    if mode not in RENDER_MODES:
        raise ValueError(f"render mode must be one of {RENDER_MODES}")


def composite_ray(samples, mode: RenderMode = "modified") -> np.ndarray:
    """Composite one ray's t-sorted samples into an RGB value.

    ``samples`` is a sequence of RaySample (or any objects with t,
    delta_prime, colour, density attributes).  Rejects input whose t values
    are not ascending.
    """
    _check_mode(mode)
    if len(samples) == 0:
        return np.zeros(3)
    t = np.array([s.t for s in samples])
    if np.any(np.diff(t) < 0.0):
        raise ValueError("composite_ray requires samples sorted ascending in t")
    sigma = np.array([s.density for s in samples])
    dp = np.array([s.delta_prime for s in samples])
    colour = np.stack([np.asarray(s.colour, dtype=np.float64) for s in samples])

    tau = sigma * dp
    transmittance = np.exp(-(np.cumsum(tau) - tau))  # exclusive prefix sum
    if mode == "standard":
        alpha = 1.0 - np.exp(-sigma * dp)
    else:
        alpha = 1.0 - np.exp(-sigma)
    weights = transmittance * alpha
    return np.clip(weights @ colour, 0.0, 1.0)


def _composite_segments(field: ExplicitField, sample_idx: np.ndarray,
                        ray_ids: np.ndarray, mode: str) -> np.ndarray:
    """Vectorized per-ray compositing over a set of rays.

    sample_idx selects this view's samples (already (ray, t)-sorted);
    ray_ids lists the rays to produce, in output order.  Rays without
    samples get zeros.
    """
    out = np.zeros((len(ray_ids), 3))
    if len(sample_idx) == 0:
        return out
    sray = field.sample_ray[sample_idx]
    sigma = field.sample_density[sample_idx]
    dp = field.sample_delta_prime[sample_idx]
    colour = field.sample_colour[sample_idx]

    tau = sigma * dp
    excl = np.cumsum(tau) - tau  # global exclusive prefix sum
    first = np.ones(len(sray), dtype=bool)
    first[1:] = sray[1:] != sray[:-1]
    first_pos = np.nonzero(first)[0]
    counts = np.diff(np.append(first_pos, len(sray)))
    # exclusive prefix within each ray: subtract the prefix accumulated
    # before the ray's first sample
    base = np.repeat(excl[first_pos], counts)
    transmittance = np.exp(-(excl - base))
    if mode == "standard":
        alpha = 1.0 - np.exp(-tau)
    else:
        alpha = 1.0 - np.exp(-sigma)
    weighted = (transmittance * alpha)[:, None] * colour

    totals = np.add.reduceat(weighted, first_pos, axis=0)
    uniq = sray[first_pos]
    pos = np.searchsorted(uniq, ray_ids)
    pos_clipped = np.minimum(pos, len(uniq) - 1)
    present = uniq[pos_clipped] == ray_ids
    out[present] = totals[pos_clipped[present]]
    return np.clip(out, 0.0, 1.0)


def render_view(field: ExplicitField, view_id: int, mode: RenderMode = "modified") -> Image:
    """Composite every pixel ray of a view into an image.

    Pixels whose ray carries no samples get the background colour; their
    count is logged as a diagnostic.
    """
    _check_mode(mode)
    info = field.view_info(view_id)
    ray_ids = np.arange(info.ray_offset, info.ray_offset + info.ray_count, dtype=np.int64)

    lo = int(np.searchsorted(field.sample_ray, ray_ids[0], side="left"))
    hi = int(np.searchsorted(field.sample_ray, ray_ids[-1], side="right"))
    sample_idx = np.arange(lo, hi)

    rgb = _composite_segments(field, sample_idx, ray_ids, mode)

    covered = np.zeros(len(ray_ids), dtype=bool)
    if len(sample_idx):
        covered[field.sample_ray[sample_idx] - info.ray_offset] = True
    missing = int((~covered).sum())
    if missing:
        log.warning("render_view %d: %d ray(s) without samples rendered as background",
                    view_id, missing)
        rgb[~covered] = np.array(field.config.background)

    return Image(width=info.width, height=info.height,
                 pixels=rgb.reshape(info.height, info.width, 3))


def write_png(image: Image, path) -> None:
    """8-bit PNG export (deterministic byte output for identical pixels)."""
    data = np.round(image.pixels * 255.0).astype(np.uint8)
    PILImage.fromarray(data, mode="RGB").save(str(path), format="PNG")


def read_png(path) -> Image:
    with PILImage.open(str(path)) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return Image(width=arr.shape[1], height=arr.shape[0], pixels=arr)


def write_float_image(image: Image, path) -> None:
    """Lossless dump: little-endian float32 raw array plus a JSON sidecar
    manifest describing shape, dtype and a content hash."""
    path = Path(path)
    raw = image.pixels.astype("<f4").tobytes()
    path.write_bytes(raw)
    manifest = {
        "width": image.width,
        "height": image.height,
        "channels": 3,
        "dtype": "<f4",
        "layout": "row-major",
        "sha256": hashlib.sha256(raw).hexdigest(),
    }
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def read_float_image(path) -> Image:
    path = Path(path)
    manifest = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    raw = path.read_bytes()
    if hashlib.sha256(raw).hexdigest() != manifest["sha256"]:
        raise ValueError(f"float image {path} failed its content hash")
    arr = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    arr = arr.reshape(manifest["height"], manifest["width"], manifest["channels"])
    return Image(width=manifest["width"], height=manifest["height"], pixels=arr)


def psnr_peak_format(value: float, cap: float = 99.0) -> float:
    """Tabular form of a PSNR value: infinities cap at 99 dB."""
    if math.isinf(value):
        return cap
    return value

"""Parametric and image-space evaluation metrics.

The parametric error of a prediction set is the per-view mean absolute
error between predicted and ground-truth values of one learnable parameter
(colour, density, depth or per-sample thickness), reported as mean +/- std
across views.  PSNR and SSIM operate on rendered images; depth predictions
get a PSNR variant over per-ray depth arrays with peak = t_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .field import ExplicitField
from .render import Image

PARAMS = ("colour", "density", "depth", "delta")

# Identical signals have infinite PSNR; tables cap the sentinel at 99 dB.
PSNR_SENTINEL = math.inf
PSNR_TABLE_CAP = 99.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class AlignmentError(ValueError):
    """Prediction values do not line up with the reference field."""


@dataclass(frozen=True)
class PredictionSet:
    """Predicted values for one learnable parameter, aligned index-for-index
    with a reference field's samples."""

    param: str
    values: np.ndarray  # (N,) or (N,3) float64

    def __post_init__(self):
        if self.param not in PARAMS:
            raise ValueError(f"param must be one of {PARAMS}")
        v = np.asarray(self.values, dtype=np.float64)
        expected_cols = 3 if self.param == "colour" else 1
        if expected_cols == 3 and (v.ndim != 2 or v.shape[1] != 3):
            raise AlignmentError("colour predictions must have shape (n, 3)")
        if expected_cols == 1 and v.ndim != 1:
            raise AlignmentError(f"{self.param} predictions must have shape (n,)")
        if not np.all(np.isfinite(v)):
            raise AlignmentError("prediction values must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class MetricReport:
    """Per-view metric values with mean and (population) std across views."""

    metric: str
    view_ids: tuple[int, ...]
    values: tuple[float, ...]
    mean: float
    std: float

    @classmethod
    def from_views(cls, metric: str, view_ids, values) -> "MetricReport":
        vals = [float(v) for v in values]
        capped = [PSNR_TABLE_CAP if math.isinf(v) else v for v in vals]
        return cls(metric=metric, view_ids=tuple(int(v) for v in view_ids),
                   values=tuple(vals),
                   mean=float(np.mean(capped)) if capped else 0.0,
                   std=float(np.std(capped)) if capped else 0.0)

    def rows(self) -> list[tuple]:
        """(view, value) rows with the infinity sentinel capped for tables."""
        capped = [PSNR_TABLE_CAP if math.isinf(v) else v for v in self.values]
        return list(zip(self.view_ids, capped))


def ground_truth_values(field: ExplicitField, param: str) -> np.ndarray:
    if param == "colour":
        return field.sample_colour
    if param == "density":
        return field.sample_density
    if param == "depth":
        return field.sample_t
    if param == "delta":
        return field.sample_delta_prime
    raise ValueError(f"unknown parameter {param!r}")


def wape(pred: PredictionSet, field: ExplicitField) -> MetricReport:
    """Whole-scene average prediction error: per view, the mean absolute
    error |gt - pred| over samples (colour averages its 3 channels), then
    mean +/- std across views."""
    gt = ground_truth_values(field, pred.param)
    if pred.values.shape != gt.shape:
        raise AlignmentError(
            f"prediction set has shape {pred.values.shape}, reference field expects "
            f"{gt.shape} for {pred.param!r}")
    err = np.abs(gt - pred.values)
    if err.ndim == 2:
        err = err.mean(axis=1)
    view_ids = sorted(set(int(v) for v in field.sample_view))
    per_view = [float(err[field.sample_view == v].mean()) for v in view_ids]
    return MetricReport.from_views(f"wape_{pred.param}", view_ids, per_view)


def psnr(a: Image, b: Image, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE) over all channels; +inf for identical images."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("psnr requires images of equal dimensions")
    mse = float(np.mean((a.pixels - b.pixels) ** 2))
    if mse == 0.0:
        return PSNR_SENTINEL
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_kernel(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _window_means(channel: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    windows = np.lib.stride_tricks.sliding_window_view(channel, kernel.shape)
    return np.tensordot(windows, kernel, axes=([2, 3], [0, 1]))


def ssim(a: Image, b: Image) -> float:
    """Windowed structural similarity with an 11x11 Gaussian window
    (sigma 1.5), K1 = 0.01, K2 = 0.03, data range 1.0.  Computed per
    channel and averaged, mean over all fully-interior windows."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("ssim requires images of equal dimensions")
    if a.width < SSIM_WINDOW or a.height < SSIM_WINDOW:
        raise ValueError(f"ssim requires images of at least "
                         f"{SSIM_WINDOW}x{SSIM_WINDOW} pixels")
    kernel = _gaussian_kernel()
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    per_channel = []
    for ch in range(3):
        x = a.pixels[:, :, ch]
        y = b.pixels[:, :, ch]
        mu_x = _window_means(x, kernel)
        mu_y = _window_means(y, kernel)
        var_x = _window_means(x * x, kernel) - mu_x ** 2
        var_y = _window_means(y * y, kernel) - mu_y ** 2
        cov = _window_means(x * y, kernel) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
        per_channel.append(float(np.mean(num / den)))
    return float(np.mean(per_channel))


def depth_psnr(pred: PredictionSet, field: ExplicitField,
               peak: float | None = None) -> MetricReport:
    """PSNR over per-view depth arrays treated as 1-channel signals.

    peak defaults to the field's t_max (the largest representable depth).
    """
    if pred.param != "depth":
        raise ValueError("depth_psnr requires depth predictions")
    gt = field.sample_t
    if pred.values.shape != gt.shape:
        raise AlignmentError("depth prediction count does not match the field")
    if peak is None:
        peak = field.config.t_max
    view_ids = sorted(set(int(v) for v in field.sample_view))
    per_view = []
    for v in view_ids:
        mask = field.sample_view == v
        mse = float(np.mean((gt[mask] - pred.values[mask]) ** 2))
        per_view.append(PSNR_SENTINEL if mse == 0.0
                        else 10.0 * math.log10(peak * peak / mse))
    return MetricReport.from_views("depth_psnr", view_ids, per_view)

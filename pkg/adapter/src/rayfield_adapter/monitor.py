"""In-training WAPE monitoring.

Mirrors the evaluation pipeline's parametric error so training curves can
be plotted per epoch without round-tripping files: mean absolute error
between predicted and target values, optionally aggregated per view
(per-view mean, then mean and population std across views), matching the
scoring CLI to float32-interchange precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WapeResult:
    value: float                      # headline number (mean over views if grouped)
    per_view: dict[int, float] | None
    std: float | None


def wape_monitor(predicted, target, view_ids=None) -> WapeResult:
    """Mean absolute error of one learnable parameter.

    2-D inputs average their channel axis first.  With view_ids the error
    is aggregated per view the same way the scoring CLI does.
    All arithmetic runs in float64 regardless of input dtype.
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if predicted.shape != target.shape:
        raise ValueError(f"prediction shape {predicted.shape} does not match "
                         f"target shape {target.shape}")
    err = np.abs(predicted - target)
    if err.ndim == 2:
        err = err.mean(axis=1)
    elif err.ndim != 1:
        raise ValueError("expected (n,) or (n, channels) arrays")

    if view_ids is None:
        return WapeResult(value=float(err.mean()), per_view=None, std=None)

    view_ids = np.asarray(view_ids)
    if view_ids.shape[0] != err.shape[0]:
        raise ValueError("view_ids length does not match the sample count")
    per_view = {int(v): float(err[view_ids == v].mean())
                for v in sorted(set(int(x) for x in view_ids))}
    values = np.array(list(per_view.values()))
    return WapeResult(value=float(values.mean()), per_view=per_view,
                      std=float(values.std()))

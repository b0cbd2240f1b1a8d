"""Recurrence-plot images from index time series.

A plot is the unthresholded pairwise-distance matrix |x_i - x_j| of one
series: symmetric, zero on the diagonal, and invariant to adding a
constant to the series. Stacking the three index channels and min-max
normalizing each one yields the fixed-range image fed to the encoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .indices import INDEX_CHANNELS


def recurrence_plot(series) -> np.ndarray:
    """n x n matrix of |x_i - x_j| for a length-n series (n >= 2)."""
    x = np.asarray(series, dtype=np.float32)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DomainError(f"need a 1-d series of length >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericalError("series contains non-finite values")
    return np.abs(x[:, None] - x[None, :])


@dataclass
class RpImage:
    """Stacked, per-channel min-max normalized recurrence plots."""

    data: np.ndarray  # (3, n, n) float32 in [0, 1]
    pixel: tuple[int, int]
    norm_lo: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.float32))
    norm_hi: np.ndarray = field(default_factory=lambda: np.ones(3, dtype=np.float32))


def stack_channels(series: np.ndarray, pixel: tuple[int, int] = (0, 0)) -> RpImage:
    """Build the 3-channel plot image of one pixel's (3, n) index series.

    Each channel is normalized to [0, 1] with its own min/max; a constant
    (degenerate) channel maps to all zeros.
    """
    series = np.asarray(series, dtype=np.float32)
    if series.ndim != 2 or series.shape[0] != len(INDEX_CHANNELS):
        raise DomainError(f"need a (3, n) series block, got shape {series.shape}")
    n = series.shape[1]
    planes = np.empty((len(INDEX_CHANNELS), n, n), dtype=np.float32)
    lo = np.empty(len(INDEX_CHANNELS), dtype=np.float32)
    hi = np.empty(len(INDEX_CHANNELS), dtype=np.float32)
    for k in range(len(INDEX_CHANNELS)):
        rp = recurrence_plot(series[k])
        lo[k], hi[k] = rp.min(), rp.max()
        if hi[k] > lo[k]:
            planes[k] = (rp - lo[k]) / (hi[k] - lo[k])
        else:
            planes[k] = 0.0
    return RpImage(data=planes, pixel=pixel, norm_lo=lo, norm_hi=hi)


def bilinear_resize(planes: np.ndarray, target: int) -> np.ndarray:
    """Channelwise bilinear resize of (c, h, w) to (c, target, target)."""
    c, h, w = planes.shape
    if (h, w) == (target, target):
        return planes.astype(np.float32, copy=True)

    def axis_weights(n_in, n_out):
        # align-corners sampling keeps the grid symmetric in its endpoints
        if n_out == 1:
            pos = np.zeros(1)
        else:
            pos = np.linspace(0.0, n_in - 1.0, n_out)
        i0 = np.floor(pos).astype(int)
        i0 = np.minimum(i0, n_in - 2) if n_in > 1 else i0
        frac = pos - i0
        mat = np.zeros((n_out, n_in), dtype=np.float64)
        mat[np.arange(n_out), i0] = 1.0 - frac
        if n_in > 1:
            mat[np.arange(n_out), i0 + 1] += frac
        return mat

    rows = axis_weights(h, target)
    cols = axis_weights(w, target)
    out = np.einsum("ij,cjk,lk->cil", rows, planes.astype(np.float64), cols)
    return out.astype(np.float32)


def resize_rp(rp: RpImage, target: int) -> RpImage:
    """Resample the plot image to target x target planes (bilinear)."""
    if target < 8:
        raise DomainError(f"target size must be at least 8, got {target}")
    return RpImage(
        data=bilinear_resize(rp.data, target),
        pixel=rp.pixel,
        norm_lo=rp.norm_lo.copy(),
        norm_hi=rp.norm_hi.copy(),
    )


def rp_batch(series_set, target: int | None = None) -> np.ndarray:
    """(m, 3, s, s) image batch for all pixels of an IndexSeriesSet."""
    images = []
    for i in range(series_set.m):
        img = stack_channels(series_set.series[i], pixel=series_set.pixels[i])
        plane = img.data if target is None else bilinear_resize(img.data, target)
        images.append(plane)
    return np.stack(images).astype(np.float32)

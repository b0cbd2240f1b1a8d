"""Vegetation indices computed from reflectance bands in [0, 1].

All denominators are guarded by a small epsilon so the functions are total
on valid reflectances; EVI is additionally clamped to [-2, 2] because its
denominator can approach zero for bright blue surfaces.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-8
EVI_CLAMP = 2.0


def ndvi(nir, red):
    """(NIR - R) / (NIR + R); in [-1, 1] for valid reflectances."""
    nir = np.asarray(nir, dtype=np.float32)
    red = np.asarray(red, dtype=np.float32)
    return (nir - red) / np.maximum(nir + red, EPS)


def evi(nir, red, blue):
    """2.5 (NIR - R) / (NIR + 6R - 7.5B + 1), clamped to [-2, 2]."""
    nir = np.asarray(nir, dtype=np.float32)
    red = np.asarray(red, dtype=np.float32)
    blue = np.asarray(blue, dtype=np.float32)
    denom = nir + 6.0 * red - 7.5 * blue + 1.0
    denom = np.where(np.abs(denom) < EPS, EPS, denom)
    return np.clip(2.5 * (nir - red) / denom, -EVI_CLAMP, EVI_CLAMP).astype(np.float32)


def savi(nir, red):
    """1.5 (NIR - R) / (NIR + R + 0.5); in [-1, 1] for valid reflectances."""
    nir = np.asarray(nir, dtype=np.float32)
    red = np.asarray(red, dtype=np.float32)
    return 1.5 * (nir - red) / np.maximum(nir + red + 0.5, EPS)


# channel order is fixed across the whole pipeline and the on-disk formats
INDEX_CHANNELS = ("ndvi", "evi", "savi")

INDEX_REGISTRY = {
    "ndvi": (ndvi, ("nir", "red")),
    "evi": (evi, ("nir", "red", "blue")),
    "savi": (savi, ("nir", "red")),
}


def index_stack(nir, red, blue):
    """Stack the three standard indices along a new leading axis."""
    return np.stack(
        [ndvi(nir, red), evi(nir, red, blue), savi(nir, red)], axis=0
    ).astype(np.float32)

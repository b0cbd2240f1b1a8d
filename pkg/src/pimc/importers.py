"""One-way converters from public dataset layouts into package formats.

These are best-effort conveniences outside the core contract: they map a
folder of class-labeled images (the EuroSAT layout) to an image/label
array pair, and a PASTIS-style folder of per-region .npy stacks to cube
files. Desk-scale runs normally use the synthetic generator instead.
"""

from __future__ import annotations

import datetime as dt
import os

import numpy as np

from .cube import SitsCube
from .errors import ConfigError
from .recurrence import bilinear_resize

# Sentinel-2 band order used by PASTIS stacks; indices into axis 1
_PASTIS_BANDS = ["blue", "green", "red", "re1", "re2", "re3", "nir", "re4", "swir1", "swir2"]
_PASTIS_SCALE = 10000.0


def import_image_folder(
    root: str, input_size: int, limit_per_class: int | None = None
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Load `root/<class>/<image>` trees into ((n,3,s,s), labels, names).

    Images are converted to RGB, scaled to [0, 1], and bilinearly resized.
    Class names are sorted for a stable label assignment.
    """
    from PIL import Image

    class_names = sorted(
        d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d))
    )
    if not class_names:
        raise ConfigError(f"no class subdirectories under {root}")
    images, labels = [], []
    for ci, name in enumerate(class_names):
        files = sorted(os.listdir(os.path.join(root, name)))
        if limit_per_class:
            files = files[:limit_per_class]
        for fname in files:
            path = os.path.join(root, name, fname)
            try:
                with Image.open(path) as img:
                    arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
            except Exception:
                continue
            chw = arr.transpose(2, 0, 1)
            images.append(bilinear_resize(chw, input_size))
            labels.append(ci)
    if not images:
        raise ConfigError(f"no readable images under {root}")
    return np.stack(images).astype(np.float32), np.asarray(labels, dtype=np.int64), class_names


def import_pastis_region(data_path: str, start=dt.date(2019, 1, 1), cadence_days: int = 5) -> SitsCube:
    """Convert one PASTIS S2 stack (t, 10, h, w) .npy file into a cube.

    Reflectances are divided by 10000 and clamped; acquisition dates are
    approximated by a fixed cadence when no metadata is supplied.
    """
    raw = np.load(data_path)
    if raw.ndim != 4 or raw.shape[1] != len(_PASTIS_BANDS):
        raise ConfigError(f"{data_path}: expected (t, 10, h, w) stack, got {raw.shape}")
    data = np.clip(raw.astype(np.float32) / _PASTIS_SCALE, 0.0, 1.0)
    timestamps = [start + dt.timedelta(days=cadence_days * i) for i in range(raw.shape[0])]
    region_id = os.path.splitext(os.path.basename(data_path))[0]
    return SitsCube(
        region_id=region_id, timestamps=timestamps, bands=list(_PASTIS_BANDS), data=data
    )

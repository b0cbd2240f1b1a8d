"""Satellite image time-series cubes and dataset manifests.

A cube is a (t, c, h, w) float32 reflectance array in [0, 1] with ordered
ISO dates and named bands. On disk it is one container block; missing
observations are encoded as NaN (float32 payloads) or 0xFFFF (uint16
payloads) and linearly interpolated along time at load, with leading and
trailing gaps taking the nearest valid value.
"""

from __future__ import annotations

import datetime as dt
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import container
from .errors import ConfigError, CorruptionError, FormatError

_EPOCH = dt.date(1970, 1, 1).toordinal()

INDEX_BANDS = ("red", "nir", "blue")


def date_to_days(d: dt.date) -> int:
    return d.toordinal() - _EPOCH


def days_to_date(days: int) -> dt.date:
    return dt.date.fromordinal(days + _EPOCH)


@dataclass
class SitsCube:
    """One region's multiband raster time series."""

    region_id: str
    timestamps: list[dt.date]
    bands: list[str]
    data: np.ndarray  # (t, c, h, w) float32 in [0, 1]

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 4:
            raise FormatError(f"cube data must be 4-d, got shape {self.data.shape}")
        t, c, _, _ = self.data.shape
        if t != len(self.timestamps):
            raise FormatError(f"{t} steps but {len(self.timestamps)} timestamps")
        if c != len(self.bands):
            raise FormatError(f"{c} channels but {len(self.bands)} band names")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if a >= b:
                raise FormatError(f"timestamps not strictly increasing: {a} >= {b}")

    @property
    def t(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[2]

    @property
    def width(self):
        return self.data.shape[3]

    def band(self, name: str) -> np.ndarray:
        """(t, h, w) view of one named band."""
        try:
            return self.data[:, self.bands.index(name)]
        except ValueError:
            raise ConfigError(f"cube '{self.region_id}' has no band '{name}'") from None

    def require_index_bands(self):
        missing = [b for b in INDEX_BANDS if b not in self.bands]
        if missing:
            raise ConfigError(f"cube '{self.region_id}' lacks bands required for indices: {missing}")


def interpolate_missing(data: np.ndarray) -> np.ndarray:
    """Fill NaNs along the time axis per (band, pixel) series."""
    if not np.any(np.isnan(data)):
        return data
    t = data.shape[0]
    flat = data.reshape(t, -1)
    bad_cols = np.where(np.isnan(flat).any(axis=0))[0]
    steps = np.arange(t)
    for col in bad_cols:
        series = flat[:, col]
        good = ~np.isnan(series)
        if not good.any():
            raise CorruptionError("a pixel series is entirely missing; cannot interpolate")
        flat[:, col] = np.interp(steps, steps[good], series[good]).astype(np.float32)
    return data


def write_cube(cube: SitsCube, path) -> None:
    container.write_tensor(
        path,
        cube.data,
        cube.bands,
        [date_to_days(d) for d in cube.timestamps],
    )


def read_cube(path) -> SitsCube:
    """Load and validate a reflectance cube; region id is the file stem."""
    data, bands, day_stamps = container.read_tensor(path)
    data = interpolate_missing(data)
    lo, hi = float(np.min(data)), float(np.max(data))
    if lo < -1e-6 or hi > 1.0 + 1e-6:
        raise FormatError(f"{path}: reflectance outside [0,1] (min {lo:.4g}, max {hi:.4g})")
    np.clip(data, 0.0, 1.0, out=data)
    region_id = os.path.splitext(os.path.basename(str(path)))[0]
    return SitsCube(
        region_id=region_id,
        timestamps=[days_to_date(d) for d in day_stamps],
        bands=bands,
        data=data,
    )


# ---------------------------------------------------------------------------
# label rasters (per-pixel integer classes stored as a 1x1xhxw block)


def write_labels(labels: np.ndarray, path) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise FormatError(f"label raster must be 2-d, got {labels.shape}")
    container.write_tensor(
        path, labels.astype(np.float32)[None, None], ["label"], [0]
    )


def read_labels(path) -> np.ndarray:
    data, bands, _ = container.read_tensor(path)
    if bands != ["label"] or data.shape[0] != 1 or data.shape[1] != 1:
        raise FormatError(f"{path}: not a label raster")
    return data[0, 0].astype(np.int64)


# ---------------------------------------------------------------------------
# dataset manifest

MANIFEST_VERSION = 1
SPLITS = ("train", "val", "test")


@dataclass
class ManifestEntry:
    cube: str  # path relative to the manifest file
    region_id: str
    split: str
    labels: str | None = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    version: int = MANIFEST_VERSION

    def regions(self, split: str | None = None) -> list[ManifestEntry]:
        return [e for e in self.entries if split is None or e.split == split]

    def to_json(self) -> str:
        doc = {
            "format_version": self.version,
            "cubes": [
                {k: v for k, v in vars(e).items() if v is not None} for e in self.entries
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "DatasetManifest":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f"manifest is not valid JSON: {e}") from None
        if doc.get("format_version") != MANIFEST_VERSION:
            raise FormatError(f"unsupported manifest version {doc.get('format_version')}")
        entries = [
            ManifestEntry(
                cube=c["cube"],
                region_id=c["region_id"],
                split=c["split"],
                labels=c.get("labels"),
            )
            for c in doc.get("cubes", [])
        ]
        return DatasetManifest(entries=entries)


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())


def load_manifest(path, validate: bool = True) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = DatasetManifest.from_json(fh.read())
    if validate:
        validate_manifest(manifest, os.path.dirname(os.path.abspath(str(path))))
    return manifest


def validate_manifest(manifest: DatasetManifest, base_dir: str) -> None:
    """Check file existence, header validity, and split disjointness."""
    seen: dict[str, str] = {}
    for e in manifest.entries:
        if e.split not in SPLITS:
            raise FormatError(f"region '{e.region_id}': unknown split '{e.split}'")
        if e.region_id in seen:
            raise FormatError(f"region '{e.region_id}' assigned to more than one split")
        seen[e.region_id] = e.split
        for rel in (e.cube, e.labels):
            if rel is None:
                continue
            full = os.path.join(base_dir, rel)
            if not os.path.isfile(full):
                raise FormatError(f"manifest references missing file: {rel}")
            with open(full, "rb") as fh:
                head = fh.read(4)
            if head != container.MAGIC:
                raise FormatError(f"{rel}: bad magic, not a container file")

"""Patch slicing, pixel sampling, and per-pixel index series construction.

Pixel coordinates are (row, col) in cube space throughout this module;
the Hilbert curve's (x, y) output maps to (row0 + y, col0 + x).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import container
from .cube import SitsCube, date_to_days, days_to_date
from .errors import ConfigError, DomainError
from .hilbert import hilbert_order
from .indices import INDEX_CHANNELS, index_stack

SAMPLING_MODES = ("hilbert", "random")


@dataclass(frozen=True)
class Patch:
    region_id: str
    row0: int
    col0: int

    @property
    def key(self) -> str:
        return f"{self.region_id}:{self.row0}:{self.col0}"


@dataclass
class PatchGrid:
    ps: int
    patches: list[Patch] = field(default_factory=list)


def slice_patches(cube: SitsCube, ps: int) -> PatchGrid:
    """Non-overlapping ps x ps tiles; remainder rows/cols are dropped."""
    if ps < 2:
        raise DomainError(f"patch side must be at least 2, got {ps}")
    rows, cols = cube.height // ps, cube.width // ps
    if rows == 0 or cols == 0:
        raise DomainError(
            f"patch side {ps} exceeds cube extent {cube.height}x{cube.width}"
        )
    patches = [
        Patch(cube.region_id, r * ps, c * ps) for r in range(rows) for c in range(cols)
    ]
    return PatchGrid(ps=ps, patches=patches)


def sample_pixels(
    ps: int,
    mode: str,
    m: int,
    seed: int | None = None,
    exclude: set[tuple[int, int]] | None = None,
) -> list[tuple[int, int]]:
    """Pick ``m`` in-patch offsets (row, col) by Hilbert stride or at random.

    Hilbert mode walks the curve with an even stride of floor(ps^2 / m) so
    the sample spreads over the whole patch; random mode draws ``m``
    distinct cells uniformly under ``seed``, skipping any in ``exclude``
    (pass the Hilbert selection there to keep the two sets disjoint).
    """
    if mode not in SAMPLING_MODES:
        raise DomainError(f"unknown sampling mode '{mode}'")
    cells = ps * ps
    if m < 1 or m > cells:
        raise DomainError(f"cannot sample {m} pixels from a {ps}x{ps} patch")
    if mode == "hilbert":
        curve = hilbert_order(ps)
        stride = max(1, cells // m)
        return [(y, x) for x, y in (curve[i * stride] for i in range(m))]
    rng = np.random.default_rng(seed)
    excluded = exclude or set()
    pool = [
        (r, c) for r in range(ps) for c in range(ps) if (r, c) not in excluded
    ]
    if m > len(pool):
        raise DomainError(
            f"cannot sample {m} pixels: only {len(pool)} cells remain after exclusion"
        )
    idx = rng.choice(len(pool), size=m, replace=False)
    return [pool[i] for i in idx]


@dataclass
class IndexSeriesSet:
    """Per-pixel vegetation-index time series for one patch.

    ``series`` has shape (m, 3, n) with channels in INDEX_CHANNELS order
    and n equal to the source cube's timestamp count.
    """

    patch: Patch
    ps: int
    pixels: list[tuple[int, int]]  # absolute (row, col) in the cube
    series: np.ndarray
    mode: str
    seed: int | None = None
    timestamps: list = field(default_factory=list)

    def __post_init__(self):
        self.series = np.asarray(self.series, dtype=np.float32)
        if self.series.ndim != 3 or self.series.shape[1] != len(INDEX_CHANNELS):
            raise DomainError(f"series must be (m, 3, n), got {self.series.shape}")
        if self.series.shape[0] != len(self.pixels):
            raise DomainError("one coordinate per series row required")

    @property
    def m(self):
        return self.series.shape[0]

    @property
    def n(self):
        return self.series.shape[2]


def build_series(
    cube: SitsCube,
    coordinates: list[tuple[int, int]],
    patch: Patch | None = None,
    ps: int | None = None,
    mode: str = "hilbert",
    seed: int | None = None,
) -> IndexSeriesSet:
    """Compute NDVI/EVI/SAVI trajectories for the given cube pixels."""
    cube.require_index_bands()
    for r, c in coordinates:
        if not (0 <= r < cube.height and 0 <= c < cube.width):
            raise DomainError(f"pixel ({r},{c}) outside cube extent")
    rows = np.array([r for r, _ in coordinates])
    cols = np.array([c for _, c in coordinates])
    nir = cube.band("nir")[:, rows, cols]  # (t, m)
    red = cube.band("red")[:, rows, cols]
    blue = cube.band("blue")[:, rows, cols]
    stack = index_stack(nir, red, blue)  # (3, t, m)
    series = np.ascontiguousarray(stack.transpose(2, 0, 1))  # (m, 3, t)
    return IndexSeriesSet(
        patch=patch or Patch(cube.region_id, 0, 0),
        ps=ps or cube.height,
        pixels=list(coordinates),
        series=series,
        mode=mode,
        seed=seed,
        timestamps=list(cube.timestamps),
    )


def extract_patch_series(
    cube: SitsCube, patch: Patch, ps: int, mode: str, m: int, seed: int | None = None,
    exclude: set[tuple[int, int]] | None = None,
) -> IndexSeriesSet:
    """Sample pixels inside one patch and build their index series."""
    offsets = sample_pixels(ps, mode, m, seed=seed, exclude=exclude)
    coords = [(patch.row0 + r, patch.col0 + c) for r, c in offsets]
    return build_series(cube, coords, patch=patch, ps=ps, mode=mode, seed=seed)


# ---------------------------------------------------------------------------
# persistence: container block + JSON sidecar


def save_series_set(sset: IndexSeriesSet, path) -> None:
    """Store series as an (n, 3, m, 1) container plus a .json sidecar."""
    data = sset.series.transpose(2, 1, 0)[..., None]  # (n, 3, m, 1)
    days = [date_to_days(d) for d in sset.timestamps] if sset.timestamps else list(range(sset.n))
    container.write_tensor(path, data, list(INDEX_CHANNELS), days)
    sidecar = {
        "kind": "index-series-set",
        "region_id": sset.patch.region_id,
        "patch_row0": sset.patch.row0,
        "patch_col0": sset.patch.col0,
        "ps": sset.ps,
        "pixels": [list(p) for p in sset.pixels],
        "mode": sset.mode,
        "seed": sset.seed,
    }
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_series_set(path) -> IndexSeriesSet:
    data, bands, days = container.read_tensor(path)
    if tuple(bands) != INDEX_CHANNELS:
        raise ConfigError(f"{path}: expected index channels {INDEX_CHANNELS}, got {bands}")
    sidecar_path = str(path) + ".json"
    if not os.path.isfile(sidecar_path):
        raise ConfigError(f"missing sidecar {sidecar_path}")
    with open(sidecar_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    series = np.ascontiguousarray(data[..., 0].transpose(2, 1, 0))  # (m, 3, n)
    return IndexSeriesSet(
        patch=Patch(meta["region_id"], meta["patch_row0"], meta["patch_col0"]),
        ps=meta["ps"],
        pixels=[tuple(p) for p in meta["pixels"]],
        series=series,
        mode=meta["mode"],
        seed=meta.get("seed"),
        timestamps=[days_to_date(d) for d in days],
    )

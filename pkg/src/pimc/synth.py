"""Synthetic reflectance cubes with known per-pixel classes.

Each pixel carries a latent class whose NIR/red trajectories are
anti-phase sinusoids with a class-specific frequency and phase offset,
plus bounded uniform noise. Three blockwise spatial fields modulate the
phase, the frequency, and a signed second-harmonic mix (waveform shape),
and the static image appearance encodes all three: the blue band tracks
the phase field, the red band's mean tracks the frequency field, and the
NIR band's mean tracks the shape field, while per-class mean/variance
texture makes appearance class-dependent. With the fields enabled, a
patch image and a pixel series from the same block therefore share
instance-level (not just class-level) structure, which is what makes
cross-modal alignment learnable; with ``phase_jitter = freq_jitter = 0``
the generator degenerates to class-pure exact sinusoids. The harmonic
field matters because a recurrence plot cannot distinguish a series from
its negation: waveform shape, not phase alone, must carry identity.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .cube import SitsCube
from .errors import DomainError

_START = dt.date(2019, 1, 5)
_CADENCE_DAYS = 5


def _block_field(rng: np.random.Generator, h: int, w: int, cell: int) -> np.ndarray:
    """Piecewise-constant uniform field on a cell x cell grid, in [0, 1].

    Constant within a cell and independent across cells, so a pixel's
    field value equals its surrounding block's value exactly; this is what
    lets one sampled pixel stand for its patch.
    """
    gh, gw = -(-h // cell), -(-w // cell)
    grid = rng.random((gh, gw))
    return np.repeat(np.repeat(grid, cell, axis=0), cell, axis=1)[:h, :w]


def synth_cube(
    seed: int,
    classes: int,
    t: int,
    h: int,
    w: int,
    noise: float = 0.02,
    phase_jitter: float = 1.0,
    freq_jitter: float = 1.0,
    texture: float = 1.0,
    region_id: str | None = None,
) -> tuple[SitsCube, np.ndarray]:
    """Generate one cube with bands (red, nir, blue) and its label raster.

    ``noise`` is the half-width of the additive uniform noise;
    ``phase_jitter`` in [0, 1] scales a smooth full-circle phase field,
    ``freq_jitter`` in [0, 1] scales a +/-8% frequency field, and
    ``texture`` scales the static per-pixel reflectance texture. With all
    three at zero every pixel of a class has the identical exact-sinusoid
    trajectory. Deterministic under ``seed``.
    """
    if classes < 2:
        raise DomainError(f"need at least 2 classes, got {classes}")
    if t < 8:
        raise DomainError(f"need at least 8 timestamps, got {t}")
    rng = np.random.default_rng(seed)

    block = max(4, min(h, w) // 8)
    bh, bw = -(-h // block), -(-w // block)
    # balanced shuffled deal keeps every class present and roughly equal
    class_blocks = rng.permuted(np.resize(np.arange(classes), bh * bw)).reshape(bh, bw)
    class_map = np.repeat(np.repeat(class_blocks, block, axis=0), block, axis=1)[:h, :w]

    field_cell = max(8, min(h, w) // 8)
    psi = _block_field(rng, h, w, field_cell)  # phase field, [0, 1]
    ufld = _block_field(rng, h, w, field_cell)  # frequency field, [0, 1]
    hfld = _block_field(rng, h, w, field_cell)  # waveform-shape field, [0, 1]

    cycles = 1.75 ** np.arange(classes)
    class_phase = 2.0 * np.pi * np.arange(classes) / classes
    nir0 = rng.uniform(0.42, 0.55, classes)
    red0 = rng.uniform(0.36, 0.48, classes)
    # texture energy forms a per-class ladder: the image-side class cue is
    # a local-variance level, stable under the block-constant temporal wave
    tex_std = 0.006 + 0.012 * rng.permutation(classes)
    amp = 0.20

    cm = class_map
    # +/-25% spread stays inside each class's frequency band (x1.75 spacing)
    freq = cycles[cm] * (1.0 + 0.25 * freq_jitter * (2.0 * ufld - 1.0))
    phase = class_phase[cm] + 2.0 * np.pi * phase_jitter * psi
    # signed second-harmonic mix: a plot distance matrix cannot tell a
    # series from its negation, so waveform shape (not phase alone) must
    # carry the pixel identity across modalities
    harm = 0.5 * phase_jitter * (2.0 * hfld - 1.0)
    tex_n = rng.normal(0.0, 1.0, (h, w)) * tex_std[cm] * texture
    tex_r = rng.normal(0.0, 1.0, (h, w)) * tex_std[cm] * texture

    # static stripe amplitudes make the frequency/shape fields readable
    # from a single frame: the temporal wave is constant within a block,
    # so it cannot contaminate a spatially high-frequency carrier
    ys, xs = np.mgrid[0:h, 0:w]
    strip_v = np.where((xs // 2) % 2 == 0, 1.0, -1.0)
    strip_h = np.where((ys // 2) % 2 == 0, 1.0, -1.0)
    nir_mean = nir0[cm] + tex_n + 0.11 * phase_jitter * hfld * strip_h
    red_mean = red0[cm] + tex_r + 0.11 * freq_jitter * ufld * strip_v
    blue_base = 0.10 + 0.6 * phase_jitter * psi

    steps = np.arange(t)[:, None, None]
    theta = 2.0 * np.pi * freq[None] * steps / t + phase[None]
    wave = amp * (np.sin(theta) + harm[None] * np.sin(2.0 * theta + 1.0))

    data = np.empty((t, 3, h, w), dtype=np.float32)
    data[:, 0] = red_mean[None] - wave
    data[:, 1] = nir_mean[None] + wave
    data[:, 2] = blue_base[None] * np.ones((t, 1, 1))
    if noise > 0:
        data += rng.uniform(-noise, noise, size=data.shape).astype(np.float32)
    np.clip(data, 0.0, 1.0, out=data)

    timestamps = [_START + dt.timedelta(days=_CADENCE_DAYS * i) for i in range(t)]
    cube = SitsCube(
        region_id=region_id or f"synth-{seed}",
        timestamps=timestamps,
        bands=["red", "nir", "blue"],
        data=data,
    )
    return cube, class_map.astype(np.int64)

"""Symmetric cross-modal contrastive training of the two encoders.

Each pair couples an image patch (one timestamp, three bands) with the
recurrence-plot image of one pixel inside it. The scaled cosine
similarity matrix between the two embedding batches is scored with a
cross entropy against the diagonal in both directions, and the mean of
the two directions is the training loss.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .cube import SitsCube
from .encoder import Encoder, EncoderConfig, encode, init_encoder, save_params
from .errors import ConfigError, DomainError, NumericalError, ShapeError
from .optim import AdamState, adam_step
from .patches import Patch, extract_patch_series, slice_patches
from .recurrence import bilinear_resize, rp_batch
from .tensor import (
    Tensor,
    add,
    l2_normalize_rows,
    matmul,
    mul,
    no_grad,
    recip,
    scale,
    softmax_cross_entropy_rows,
    transpose2d,
)

log = logging.getLogger(__name__)

TEMP_MIN = 1e-3
TEMP_MAX = 100.0


def similarity_matrix(i_feat: Tensor, t_feat: Tensor, temperature) -> Tensor:
    """Row-normalized dot products divided by the temperature.

    ``temperature`` may be a scalar Tensor (to learn it) or a float.
    """
    if i_feat.shape != t_feat.shape:
        raise ShapeError(f"feature shapes differ: {i_feat.shape} vs {t_feat.shape}")
    sims = matmul(l2_normalize_rows(i_feat), transpose2d(l2_normalize_rows(t_feat)))
    if isinstance(temperature, Tensor):
        return mul(sims, recip(temperature))
    return scale(sims, 1.0 / float(temperature))


def pimc_loss(s: Tensor) -> Tensor:
    """Mean of the row-wise and column-wise diagonal cross entropies."""
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeError(f"similarity matrix must be square, got {s.shape}")
    targets = np.arange(s.shape[0])
    both = add(
        softmax_cross_entropy_rows(s, targets),
        softmax_cross_entropy_rows(transpose2d(s), targets),
    )
    return scale(both, 0.5)


# ---------------------------------------------------------------------------
# pair dataset


@dataclass
class PairEntry:
    patch: Patch
    pixel: tuple[int, int]
    plot: np.ndarray  # (3, s, s) float32


@dataclass
class PairBatch:
    images: np.ndarray  # (b, 3, s, s)
    plots: np.ndarray  # (b, 3, s, s)
    patch_keys: list[str]
    pixels: list[tuple[int, int]]
    timesteps: list[int]


class PairDataset:
    """Plot images with patch provenance plus access to the source cubes."""

    def __init__(self, cubes: dict[str, SitsCube], entries: list[PairEntry], ps: int, input_size: int):
        if not entries:
            raise ConfigError("pair dataset is empty")
        self.cubes = cubes
        self.entries = entries
        self.ps = ps
        self.input_size = input_size
        self.by_patch: dict[str, list[int]] = {}
        for i, e in enumerate(entries):
            self.by_patch.setdefault(e.patch.key, []).append(i)
        t_values = {cube.t for cube in cubes.values()}
        if len(t_values) != 1:
            raise ConfigError("all cubes in a pair dataset must share the timestamp count")
        self.t = t_values.pop()
        sample = cubes[entries[0].patch.region_id]
        self.image_band_idx = _image_band_indices(sample)

    def patch_image(self, patch: Patch, timestep: int) -> np.ndarray:
        cube = self.cubes[patch.region_id]
        crop = cube.data[
            timestep, self.image_band_idx, patch.row0 : patch.row0 + self.ps, patch.col0 : patch.col0 + self.ps
        ]
        return bilinear_resize(crop, self.input_size)


def _image_band_indices(cube: SitsCube) -> list[int]:
    """(red, green, blue) when present, else the first three bands."""
    if all(b in cube.bands for b in ("red", "green", "blue")):
        return [cube.bands.index(b) for b in ("red", "green", "blue")]
    if len(cube.bands) < 3:
        raise ConfigError(f"cube '{cube.region_id}' has fewer than 3 bands")
    return [0, 1, 2]


def build_pair_dataset(
    cubes: list[SitsCube],
    ps: int,
    pixels_per_patch: int,
    input_size: int,
    seed: int = 0,
    mode: str = "hilbert",
) -> PairDataset:
    """Slice every cube, sample pixels, and precompute the plot images."""
    entries: list[PairEntry] = []
    cube_map: dict[str, SitsCube] = {}
    for ci, cube in enumerate(cubes):
        if cube.region_id in cube_map:
            raise ConfigError(f"duplicate region id '{cube.region_id}'")
        cube_map[cube.region_id] = cube
        grid = slice_patches(cube, ps)
        for pi, patch in enumerate(grid.patches):
            sset = extract_patch_series(
                cube, patch, ps, mode, pixels_per_patch, seed=[seed, ci, pi]
            )
            plots = rp_batch(sset, target=input_size)
            for k in range(sset.m):
                entries.append(PairEntry(patch=patch, pixel=sset.pixels[k], plot=plots[k]))
    return PairDataset(cube_map, entries, ps, input_size)


def make_pair_batches(dataset: PairDataset, batch_size: int, seed: int, epoch: int):
    """Deterministic epoch batches with at most one pixel per patch each.

    Every entry appears exactly once per epoch: entries are dealt in
    rounds (one pixel per patch per round), with patch order reshuffled
    every round under (seed, epoch).
    """
    if batch_size < 1:
        raise DomainError("batch size must be positive")
    rng = np.random.default_rng([seed, epoch])
    n_patches = len(dataset.by_patch)
    if n_patches < batch_size:
        log.warning(
            "only %d distinct patches for batch size %d; final batches will be smaller",
            n_patches,
            batch_size,
        )
    patch_keys = sorted(dataset.by_patch)
    per_patch = {k: list(rng.permutation(dataset.by_patch[k])) for k in patch_keys}
    rounds = max(len(v) for v in per_patch.values())
    for rnd in range(rounds):
        avail = [k for k in patch_keys if rnd < len(per_patch[k])]
        order = rng.permutation(len(avail))
        for start in range(0, len(avail), batch_size):
            chunk = [avail[i] for i in order[start : start + batch_size]]
            idxs = [per_patch[k][rnd] for k in chunk]
            timesteps = rng.integers(0, dataset.t, size=len(chunk)).tolist()
            entries = [dataset.entries[i] for i in idxs]
            images = np.stack(
                [dataset.patch_image(e.patch, ts) for e, ts in zip(entries, timesteps)]
            )
            plots = np.stack([e.plot for e in entries])
            yield PairBatch(
                images=images.astype(np.float32),
                plots=plots.astype(np.float32),
                patch_keys=[e.patch.key for e in entries],
                pixels=[e.pixel for e in entries],
                timesteps=timesteps,
            )


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainConfig:
    epochs: int = 400
    lr: float = 1e-3
    weight_decay: float = 1e-4
    batch_size: int = 64
    temp_init: float = 0.07
    seed: int = 0
    checkpoint_cadence: int = 50  # epochs between periodic checkpoints
    plot_noise: float = 0.05  # train-time additive noise on plot inputs
    encoder: EncoderConfig = field(default_factory=EncoderConfig)

    def __post_init__(self):
        if not (TEMP_MIN <= self.temp_init <= TEMP_MAX):
            raise DomainError(f"temperature init {self.temp_init} outside [{TEMP_MIN}, {TEMP_MAX}]")
        if self.epochs < 1:
            raise DomainError("need at least one epoch")
        if self.plot_noise < 0:
            raise DomainError("plot noise must be non-negative")

    @staticmethod
    def desk(input_size: int = 32, **kw) -> "TrainConfig":
        """Minutes-scale preset: 40 epochs, small encoder, batch 32."""
        defaults = dict(
            epochs=40,
            batch_size=32,
            checkpoint_cadence=20,
            encoder=EncoderConfig.desk(input_size=input_size),
        )
        defaults.update(kw)
        return TrainConfig(**defaults)


@dataclass
class TrainState:
    adam_image: AdamState
    adam_series: AdamState
    adam_temp: AdamState
    epoch: int = 0
    step: int = 0
    loss_history: list[float] = field(default_factory=list)
    temperature: float = 0.0
    best_val: float = float("inf")
    best_epoch: int = -1


@dataclass
class TrainResult:
    image_encoder: Encoder
    series_encoder: Encoder
    state: TrainState
    checkpoints: dict[str, str] = field(default_factory=dict)


_VAL_STREAM = 999_999_937  # epoch tag for the held-out loss batches


def _epoch_val_loss(image_enc, series_enc, temperature, dataset, config) -> float:
    losses = []
    with no_grad():
        for batch in make_pair_batches(dataset, config.batch_size, config.seed, epoch=_VAL_STREAM):
            i_feat = encode(image_enc, batch.images, train=False)
            t_feat = encode(series_enc, batch.plots, train=False)
            s = similarity_matrix(i_feat, t_feat, float(temperature.data))
            losses.append(pimc_loss(s).item())
    return float(np.mean(losses))


def train(
    dataset: PairDataset,
    config: TrainConfig,
    out_dir: str | None = None,
    val_dataset: PairDataset | None = None,
) -> TrainResult:
    """Optimize both encoders and the temperature on the pair stream.

    Writes ``loss.csv`` (step, epoch, loss, temperature; deterministic)
    and ``train_log.csv`` (adds wall_ms) plus periodic/best/final
    checkpoints when ``out_dir`` is given. A non-finite loss aborts with
    the last good checkpoint path in the raised error.
    """
    if dataset.input_size != config.encoder.input_size:
        raise ConfigError(
            f"dataset input size {dataset.input_size} != encoder input size {config.encoder.input_size}"
        )
    image_enc = init_encoder(config.encoder, seed=[config.seed, 1])
    series_enc = init_encoder(config.encoder, seed=[config.seed, 2])
    temperature = Tensor(np.float32(config.temp_init), requires_grad=True)
    state = TrainState(
        adam_image=AdamState(lr=config.lr, weight_decay=config.weight_decay),
        adam_series=AdamState(lr=config.lr, weight_decay=config.weight_decay),
        adam_temp=AdamState(lr=config.lr),
        temperature=float(temperature.data),
    )
    result = TrainResult(image_enc, series_enc, state)

    loss_rows: list[str] = []
    log_rows: list[str] = []
    image_params = image_enc.params()
    series_params = series_enc.params()
    last_good = "<none>"

    def checkpoint(tag: str) -> str:
        if out_dir is None:
            return "<unsaved>"
        os.makedirs(out_dir, exist_ok=True)
        extra = {"temperature": float(temperature.data), "epoch": state.epoch}
        ipath = os.path.join(out_dir, f"image_{tag}.ckpt")
        spath = os.path.join(out_dir, f"series_{tag}.ckpt")
        save_params(image_enc, ipath, step=state.step, extra=extra)
        save_params(series_enc, spath, step=state.step, extra=extra)
        result.checkpoints[f"image_{tag}"] = ipath
        result.checkpoints[f"series_{tag}"] = spath
        return ipath

    aug_rng = np.random.default_rng([config.seed, 11])
    for epoch in range(config.epochs):
        state.epoch = epoch
        epoch_losses = []
        for batch in make_pair_batches(dataset, config.batch_size, config.seed, epoch):
            t0 = time.perf_counter()
            plots = batch.plots
            if config.plot_noise > 0:
                # fresh noise per presentation keeps the plot encoder from
                # keying on per-sample pixel noise instead of structure
                plots = plots + aug_rng.normal(0.0, config.plot_noise, plots.shape).astype(np.float32)
            i_feat = encode(image_enc, batch.images, train=True)
            t_feat = encode(series_enc, plots, train=True)
            s = similarity_matrix(i_feat, t_feat, temperature)
            loss = pimc_loss(s)
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                checkpoint_path = last_good
                _flush_logs(out_dir, loss_rows, log_rows)
                raise NumericalError(
                    f"non-finite loss at step {state.step}; last good checkpoint: {checkpoint_path}"
                )
            loss.backward()
            adam_step(image_params, state.adam_image)
            adam_step(series_params, state.adam_series)
            adam_step({"temperature": temperature}, state.adam_temp)
            temperature.data = np.clip(temperature.data, TEMP_MIN, TEMP_MAX)
            state.step += 1
            state.loss_history.append(loss_value)
            epoch_losses.append(loss_value)
            wall_ms = (time.perf_counter() - t0) * 1000.0
            loss_rows.append(f"{state.step},{epoch},{loss_value:.6f},{float(temperature.data):.6f}")
            log_rows.append(loss_rows[-1] + f",{wall_ms:.3f}")
        state.temperature = float(temperature.data)
        if val_dataset is not None:
            val_loss = _epoch_val_loss(image_enc, series_enc, temperature, val_dataset, config)
        else:
            val_loss = float(np.mean(epoch_losses))
        if val_loss < state.best_val:
            state.best_val = val_loss
            state.best_epoch = epoch
            last_good = checkpoint("best")
        if config.checkpoint_cadence and (epoch + 1) % config.checkpoint_cadence == 0:
            last_good = checkpoint(f"ep{epoch + 1:04d}")
        log.info("epoch %d: loss %.4f (val %.4f), temperature %.4f", epoch, float(np.mean(epoch_losses)), val_loss, state.temperature)

    checkpoint("final")
    _flush_logs(out_dir, loss_rows, log_rows)
    return result


def _flush_logs(out_dir, loss_rows, log_rows):
    if out_dir is None:
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "loss.csv"), "w", encoding="utf-8") as fh:
        fh.write("step,epoch,loss,temperature\n")
        fh.write("\n".join(loss_rows) + ("\n" if loss_rows else ""))
    with open(os.path.join(out_dir, "train_log.csv"), "w", encoding="utf-8") as fh:
        fh.write("step,epoch,loss,temperature,wall_ms\n")
        fh.write("\n".join(log_rows) + ("\n" if log_rows else ""))


# ---------------------------------------------------------------------------
# cross-modal retrieval (alignment diagnostic)


def cross_modal_retrieval(
    image_enc: Encoder,
    series_enc: Encoder,
    dataset: PairDataset,
    seed: int = 0,
    max_pairs: int | None = None,
    batch: int = 128,
) -> float:
    """Mean top-1 accuracy of image->plot and plot->image retrieval.

    One pair per patch (the first sampled pixel), image timesteps drawn
    deterministically under ``seed``.
    """
    rng = np.random.default_rng([seed, 7])
    keys = sorted(dataset.by_patch)
    if max_pairs is not None:
        keys = keys[:max_pairs]
    entries = [dataset.entries[dataset.by_patch[k][0]] for k in keys]
    timesteps = rng.integers(0, dataset.t, size=len(entries))
    images = np.stack([dataset.patch_image(e.patch, int(ts)) for e, ts in zip(entries, timesteps)])
    plots = np.stack([e.plot for e in entries])

    def embed(enc, arr):
        outs = []
        with no_grad():
            for i in range(0, len(arr), batch):
                feats = encode(enc, arr[i : i + batch], train=False)
                outs.append(l2_normalize_rows(feats).data)
        return np.concatenate(outs, axis=0)

    i_emb = embed(image_enc, images)
    t_emb = embed(series_enc, plots)
    sims = i_emb @ t_emb.T
    n = len(entries)
    i2t = float(np.mean(np.argmax(sims, axis=1) == np.arange(n)))
    t2i = float(np.mean(np.argmax(sims, axis=0) == np.arange(n)))
    return 0.5 * (i2t + t2i)

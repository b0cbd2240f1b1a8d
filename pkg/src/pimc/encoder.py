"""Compact residual convolutional encoder with a linear projection head.

Stem conv, then one residual stage per configured width (stride-2
downsampling between stages), global average pooling, and a linear map to
the embedding dimension. Two independently initialized instances serve as
the image-patch and plot encoders.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import container
from .errors import DomainError, FormatError, ShapeError
from .nn import BatchNorm2d, Conv2d, Linear, adaptive_avg_pool2d
from .tensor import Tensor, add, relu, reshape


@dataclass(frozen=True)
class EncoderConfig:
    widths: tuple[int, ...] = (16, 32, 64, 128)
    blocks_per_stage: int = 2
    in_channels: int = 3
    embed_dim: int = 128
    input_size: int = 64
    zero_init_residual: bool = False

    def __post_init__(self):
        if not self.widths or any(w < 1 for w in self.widths):
            raise DomainError(f"stage widths must be positive, got {self.widths}")
        if self.embed_dim < 8:
            raise DomainError(f"embedding dim must be at least 8, got {self.embed_dim}")
        if self.blocks_per_stage < 1:
            raise DomainError("need at least one block per stage")
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))

    @staticmethod
    def desk(input_size: int = 32, embed_dim: int = 64) -> "EncoderConfig":
        """Small preset that trains in minutes on a CPU."""
        return EncoderConfig(
            widths=(8, 16, 32, 64),
            blocks_per_stage=1,
            embed_dim=embed_dim,
            input_size=input_size,
        )

    @staticmethod
    def full(input_size: int = 64, embed_dim: int = 128) -> "EncoderConfig":
        """Full-width preset mirroring an 18-layer residual net; untested at scale."""
        return EncoderConfig(
            widths=(64, 128, 256, 512),
            blocks_per_stage=2,
            embed_dim=embed_dim,
            input_size=input_size,
        )


class ResidualBlock:
    """Two 3x3 convs with batch norm and an identity or projection shortcut."""

    def __init__(self, cin, cout, stride, zero_init, rng):
        self.conv1 = Conv2d(cin, cout, 3, stride=stride, padding=1, rng=rng)
        self.bn1 = BatchNorm2d(cout)
        self.conv2 = Conv2d(cout, cout, 3, stride=1, padding=1, rng=rng)
        self.bn2 = BatchNorm2d(cout, zero_gamma=zero_init)
        self.project = stride != 1 or cin != cout
        if self.project:
            self.conv_sc = Conv2d(cin, cout, 1, stride=stride, padding=0, rng=rng)
            self.bn_sc = BatchNorm2d(cout)

    def __call__(self, x: Tensor, train: bool) -> Tensor:
        out = relu(self.bn1(self.conv1(x), train))
        out = self.bn2(self.conv2(out), train)
        shortcut = self.bn_sc(self.conv_sc(x), train) if self.project else x
        return relu(add(out, shortcut))

    def named_children(self, prefix):
        yield f"{prefix}.conv1", self.conv1
        yield f"{prefix}.bn1", self.bn1
        yield f"{prefix}.conv2", self.conv2
        yield f"{prefix}.bn2", self.bn2
        if self.project:
            yield f"{prefix}.conv_sc", self.conv_sc
            yield f"{prefix}.bn_sc", self.bn_sc


class Encoder:
    def __init__(self, config: EncoderConfig, seed: int):
        self.config = config
        self.seed = seed
        rng = np.random.default_rng(seed)
        w0 = config.widths[0]
        self.stem_conv = Conv2d(config.in_channels, w0, 3, stride=1, padding=1, rng=rng)
        self.stem_bn = BatchNorm2d(w0)
        self.stages: list[list[ResidualBlock]] = []
        cin = w0
        for si, width in enumerate(config.widths):
            blocks = []
            for bi in range(config.blocks_per_stage):
                stride = 2 if (si > 0 and bi == 0) else 1
                blocks.append(
                    ResidualBlock(cin, width, stride, config.zero_init_residual, rng)
                )
                cin = width
            self.stages.append(blocks)
        self.head = Linear(config.widths[-1], config.embed_dim, rng=rng)

    def _named_children(self):
        yield "stem.conv", self.stem_conv
        yield "stem.bn", self.stem_bn
        for si, blocks in enumerate(self.stages):
            for bi, block in enumerate(blocks):
                yield from block.named_children(f"stage{si}.block{bi}")
        yield "head", self.head

    def params(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for prefix, child in self._named_children():
            out.update(child.params(prefix))
        return out

    def buffers(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for prefix, child in self._named_children():
            out.update(child.buffers(prefix))
        return out

    @property
    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.params().values())

    def forward(self, x: Tensor, train: bool = False) -> Tensor:
        if x.ndim != 4 or x.shape[1] != self.config.in_channels:
            raise ShapeError(f"expected (b,{self.config.in_channels},s,s), got {x.shape}")
        if x.shape[2] != self.config.input_size or x.shape[3] != self.config.input_size:
            raise ShapeError(
                f"input spatial size {x.shape[2]}x{x.shape[3]} != configured {self.config.input_size}"
            )
        h = relu(self.stem_bn(self.stem_conv(x), train))
        for blocks in self.stages:
            for block in blocks:
                h = block(h, train)
        pooled = adaptive_avg_pool2d(h, (1, 1))
        flat = reshape(pooled, (x.shape[0], self.config.widths[-1]))
        return self.head(flat)


def init_encoder(config: EncoderConfig, seed: int) -> Encoder:
    return Encoder(config, seed)


def encode(encoder: Encoder, batch, train: bool = False) -> Tensor:
    """Embed a (b, 3, s, s) batch; accepts an ndarray or Tensor."""
    x = batch if isinstance(batch, Tensor) else Tensor(batch)
    return encoder.forward(x, train=train)


def parameter_count(config: EncoderConfig) -> int:
    """Closed-form parameter total implied by a config."""
    def conv_n(cin, cout, k):
        return cout * cin * k * k

    def bn_n(c):
        return 2 * c

    w0 = config.widths[0]
    total = conv_n(config.in_channels, w0, 3) + bn_n(w0)
    cin = w0
    for si, width in enumerate(config.widths):
        for bi in range(config.blocks_per_stage):
            stride = 2 if (si > 0 and bi == 0) else 1
            total += conv_n(cin, width, 3) + bn_n(width)
            total += conv_n(width, width, 3) + bn_n(width)
            if stride != 1 or cin != width:
                total += conv_n(cin, width, 1) + bn_n(width)
            cin = width
    total += config.widths[-1] * config.embed_dim + config.embed_dim
    return total


# ---------------------------------------------------------------------------
# checkpoints: one container block per tensor plus a JSON index

CHECKPOINT_VERSION = 1


def _as_block(arr: np.ndarray) -> np.ndarray:
    """Map a tensor of rank <= 4 onto the container's four axes."""
    if arr.ndim > 4:
        raise FormatError(f"cannot store rank-{arr.ndim} tensor in a container block")
    return arr.reshape(list(arr.shape) + [1] * (4 - arr.ndim))


def save_params(encoder: Encoder, path, step: int = 0, extra: dict | None = None) -> None:
    """Write all parameters and buffers plus a JSON index next to them."""
    tensors: dict[str, np.ndarray] = {k: v.data for k, v in encoder.params().items()}
    tensors.update(encoder.buffers())
    index = {
        "checkpoint_version": CHECKPOINT_VERSION,
        "config": asdict(encoder.config),
        "seed": encoder.seed,
        "step": step,
        "extra": extra or {},
        "tensors": {},
    }
    with open(path, "wb") as fh:
        for name in sorted(tensors):
            arr = np.asarray(tensors[name], dtype=np.float32)
            index["tensors"][name] = {"offset": fh.tell(), "shape": list(arr.shape)}
            block = _as_block(arr)
            container.write_block(
                fh, block, [f"d{i}" for i in range(block.shape[1])], list(range(block.shape[0]))
            )
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_params(path) -> tuple[Encoder, dict]:
    """Rebuild an encoder from a checkpoint; returns (encoder, index meta)."""
    index_path = str(path) + ".json"
    if not os.path.isfile(index_path):
        raise FormatError(f"missing checkpoint index {index_path}")
    with open(index_path, "r", encoding="utf-8") as fh:
        index = json.load(fh)
    if index.get("checkpoint_version") != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {index.get('checkpoint_version')}")
    cfg_doc = dict(index["config"])
    cfg_doc["widths"] = tuple(cfg_doc["widths"])
    config = EncoderConfig(**cfg_doc)
    encoder = Encoder(config, seed=index.get("seed", 0))
    params = encoder.params()
    buffers = encoder.buffers()
    with open(path, "rb") as fh:
        for name, meta in index["tensors"].items():
            fh.seek(meta["offset"])
            data, _, _ = container.read_block(fh)[:3]
            arr = data.reshape(meta["shape"]).astype(np.float32)
            if name in params:
                if params[name].data.shape != arr.shape:
                    raise FormatError(f"checkpoint tensor '{name}' has shape {arr.shape}")
                params[name].data = arr
            elif name in buffers:
                buffers[name][...] = arr
            else:
                raise FormatError(f"checkpoint tensor '{name}' not in model")
    if not np.all([np.all(np.isfinite(p.data)) for p in params.values()]):
        raise FormatError("checkpoint contains non-finite parameters")
    return encoder, index

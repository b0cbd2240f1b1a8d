"""Convolution, batch normalization, pooling, and thin layer wrappers.

Layers hold their parameters as ``Tensor`` objects (plus plain ndarray
buffers for batch-norm running statistics) and expose them keyed by a
dotted path, which is also the on-disk checkpoint key.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError
from .tensor import Tensor, make_node

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def conv2d(x: Tensor, w: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of a (b,c,h,w) batch with an (o,c,kh,kw) kernel.

    Output spatial dims are floor((dim + 2*padding - k) / stride) + 1.
    """
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeError(f"conv2d needs 4-d input and kernel, got {x.shape}, {w.shape}")
    b, c, h, wd = x.shape
    o, c2, kh, kw = w.shape
    if c != c2:
        raise ShapeError(f"input channels {c} != kernel channels {c2}")
    if kh > h + 2 * padding or kw > wd + 2 * padding:
        raise ShapeError(f"kernel {kh}x{kw} larger than padded input {h + 2 * padding}x{wd + 2 * padding}")
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (wd + 2 * padding - kw) // stride + 1

    xp = x.data
    if padding:
        xp = np.pad(xp, ((0, 0), (0, 0), (padding, padding), (padding, padding)))

    def im2col(arr):
        # windows: (b, c, ho, wo, kh, kw) -> rows of (c*kh*kw)
        win = sliding_window_view(arr, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        return win.transpose(0, 2, 3, 1, 4, 5).reshape(b * ho * wo, c * kh * kw)

    cols = im2col(xp)
    w2 = w.data.reshape(o, c * kh * kw)
    out = (cols @ w2.T).reshape(b, ho, wo, o).transpose(0, 3, 1, 2)
    out = np.ascontiguousarray(out, dtype=np.float32)

    def backward(g):
        g2 = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(b * ho * wo, o)
        if w.requires_grad:
            # cols are recomputed from the saved padded input to keep the
            # tape's memory footprint at one activation per op
            w.accumulate_grad((g2.T @ im2col(xp)).reshape(o, c, kh, kw))
        if x.requires_grad:
            gcols = (g2 @ w2).reshape(b, ho, wo, c, kh, kw)
            gxp = np.zeros_like(xp)
            for i in range(kh):
                for j in range(kw):
                    gxp[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += (
                        gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                    )
            if padding:
                gxp = gxp[:, :, padding : padding + h, padding : padding + wd]
            x.accumulate_grad(gxp)

    return make_node(out, (x, w), backward)


def batchnorm2d(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    train: bool,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> Tensor:
    """Per-channel batch normalization over (b, h, w).

    Train mode normalizes with batch statistics and updates the running
    buffers in place (side effect, not differentiated); eval mode uses the
    running buffers and is a pure function.
    """
    if x.ndim != 4:
        raise ShapeError(f"batchnorm2d needs (b,c,h,w), got {x.shape}")
    b, c, h, w = x.shape
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeError("gamma/beta must have one entry per channel")
    x64 = x.data.astype(np.float64)
    if train:
        n = b * h * w
        mean = x64.mean(axis=(0, 2, 3))
        var = x64.var(axis=(0, 2, 3))
        unbiased = var * n / max(n - 1, 1)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean.astype(np.float32)
        running_var *= 1.0 - momentum
        running_var += momentum * unbiased.astype(np.float32)
    else:
        mean = running_mean.astype(np.float64)
        var = running_var.astype(np.float64)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = ((x64 - mean[None, :, None, None]) * inv[None, :, None, None]).astype(np.float32)
    out = xhat * gamma.data[None, :, None, None] + beta.data[None, :, None, None]

    def backward(g):
        g64 = g.astype(np.float64)
        xh = xhat.astype(np.float64)
        if gamma.requires_grad:
            gamma.accumulate_grad((g64 * xh).sum(axis=(0, 2, 3)).astype(np.float32))
        if beta.requires_grad:
            beta.accumulate_grad(g64.sum(axis=(0, 2, 3)).astype(np.float32))
        if x.requires_grad:
            scaled = g64 * gamma.data.astype(np.float64)[None, :, None, None]
            if train:
                mg = scaled.mean(axis=(0, 2, 3), keepdims=True)
                mgx = (scaled * xh).mean(axis=(0, 2, 3), keepdims=True)
                dx = inv[None, :, None, None] * (scaled - mg - xh * mgx)
            else:
                dx = scaled * inv[None, :, None, None]
            x.accumulate_grad(dx.astype(np.float32))

    return make_node(out, (x, gamma, beta), backward)


def adaptive_avg_pool2d(x: Tensor, out_hw: tuple[int, int] = (1, 1)) -> Tensor:
    """Average pooling to a fixed output grid (equal-share bins)."""
    if x.ndim != 4:
        raise ShapeError(f"adaptive_avg_pool2d needs (b,c,h,w), got {x.shape}")
    b, c, h, w = x.shape
    oh, ow = out_hw
    if oh < 1 or ow < 1 or oh > h or ow > w:
        raise ShapeError(f"output grid {out_hw} invalid for input {h}x{w}")
    if (oh, ow) == (1, 1):
        out = x.data.mean(axis=(2, 3), keepdims=True, dtype=np.float64).astype(np.float32)

        def backward(g):
            if x.requires_grad:
                x.accumulate_grad(np.broadcast_to(g / np.float32(h * w), x.data.shape).copy())

        return make_node(out, (x,), backward)

    hb = [(i * h // oh, (i + 1) * h // oh) for i in range(oh)]
    wb = [(j * w // ow, (j + 1) * w // ow) for j in range(ow)]
    out = np.empty((b, c, oh, ow), dtype=np.float32)
    for i, (h0, h1) in enumerate(hb):
        for j, (w0, w1) in enumerate(wb):
            out[:, :, i, j] = x.data[:, :, h0:h1, w0:w1].mean(axis=(2, 3), dtype=np.float64)

    def backward(g):
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            for i, (h0, h1) in enumerate(hb):
                for j, (w0, w1) in enumerate(wb):
                    gx[:, :, h0:h1, w0:w1] += (g[:, :, i, j] / np.float32((h1 - h0) * (w1 - w0)))[
                        :, :, None, None
                    ]
            x.accumulate_grad(gx)

    return make_node(out, (x,), backward)


# ---------------------------------------------------------------------------
# layers


def he_normal(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape).astype(np.float32)


class Conv2d:
    def __init__(self, cin: int, cout: int, k: int, stride: int = 1, padding: int = 0, *, rng: np.random.Generator):
        self.stride = stride
        self.padding = padding
        self.w = Tensor(he_normal(rng, (cout, cin, k, k), cin * k * k), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.w, self.stride, self.padding)

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.w": self.w}

    def buffers(self, prefix: str) -> dict[str, np.ndarray]:
        return {}


class BatchNorm2d:
    def __init__(self, c: int, zero_gamma: bool = False):
        init = np.zeros(c, dtype=np.float32) if zero_gamma else np.ones(c, dtype=np.float32)
        self.gamma = Tensor(init, requires_grad=True)
        self.beta = Tensor(np.zeros(c, dtype=np.float32), requires_grad=True)
        self.running_mean = np.zeros(c, dtype=np.float32)
        self.running_var = np.ones(c, dtype=np.float32)

    def __call__(self, x: Tensor, train: bool) -> Tensor:
        return batchnorm2d(x, self.gamma, self.beta, self.running_mean, self.running_var, train)

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.gamma": self.gamma, f"{prefix}.beta": self.beta}

    def buffers(self, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}.running_mean": self.running_mean, f"{prefix}.running_var": self.running_var}


class Linear:
    def __init__(self, cin: int, cout: int, *, rng: np.random.Generator):
        self.w = Tensor(he_normal(rng, (cout, cin), cin), requires_grad=True)
        self.b = Tensor(np.zeros(cout, dtype=np.float32), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        from .tensor import linear

        return linear(x, self.w, self.b)

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.w": self.w, f"{prefix}.b": self.b}

    def buffers(self, prefix: str) -> dict[str, np.ndarray]:
        return {}

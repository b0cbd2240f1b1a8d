"""Dense float32 tensors with reverse-mode automatic differentiation.

Each forward operation records a closure on the output node; calling
``backward()`` on a scalar (or with an explicit seed gradient) walks the
tape in reverse topological order and then frees it, so a graph supports
exactly one backward pass per forward pass.

Values are float32 throughout; reductions (sums, means, normalizations,
log-sum-exp) accumulate in float64 internally before casting back.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager

import numpy as np

from .errors import DomainError, ShapeError

log = logging.getLogger(__name__)

_GRAD_ENABLED = True


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference / data prep)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    """A float32 ndarray plus an optional gradient buffer and tape node."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_freed")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float32)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents: tuple = ()
        self._backward = None
        self._freed = False

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def zero_grad(self):
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def accumulate_grad(self, g: np.ndarray):
        g = np.asarray(g, dtype=np.float32)
        if g.shape != self.data.shape:
            raise ShapeError(f"gradient shape {g.shape} != value shape {self.data.shape}")
        self.grad = g if self.grad is None else self.grad + g

    def backward(self, grad=None):
        """Reverse-mode pass from this node; frees the tape afterwards.

        ``grad`` defaults to ones, which for a scalar output is the usual
        dL/dL = 1 seed.
        """
        if self._freed:
            raise DomainError("tape already freed: one backward pass per forward pass")
        if self._backward is None and not self._parents and not self.requires_grad:
            raise DomainError("backward() on a node with no tape")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        seed = np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=np.float32)
        self.accumulate_grad(seed)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            # free the tape: one backward per forward
            node._backward = None
            node._parents = ()
            node._freed = True

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def make_node(data: np.ndarray, parents: tuple, backward_fn) -> Tensor:
    """Wrap an op result; records the tape edge only when gradients flow."""
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out = Tensor(data, requires_grad=True)
        out._parents = parents
        out._backward = backward_fn
        return out
    return Tensor(data)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient over dimensions that were broadcast in the forward op."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g, b.data.shape))

    return make_node(out, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(-g, b.data.shape))

    return make_node(out, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b.accumulate_grad(_unbroadcast(g * a.data, b.data.shape))

    return make_node(out, (a, b), backward)


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    out = a.data * np.float32(s)

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g * np.float32(s))

    return make_node(out, (a,), backward)


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def recip(a: Tensor) -> Tensor:
    """Elementwise 1/x. Caller guarantees x is bounded away from zero."""
    out = np.float32(1.0) / a.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(-g * out * out)

    return make_node(out, (a,), backward)


def relu(a: Tensor) -> Tensor:
    out = np.maximum(a.data, np.float32(0.0))

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g * (a.data > 0))

    return make_node(out, (a,), backward)


# ---------------------------------------------------------------------------
# shape manipulation


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g.reshape(a.data.shape))

    return make_node(out, (a,), backward)


def transpose2d(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose2d needs a matrix, got shape {a.shape}")
    out = np.ascontiguousarray(a.data.T)

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(np.ascontiguousarray(g.T))

    return make_node(out, (a,), backward)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs matrices, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g @ b.data.T)
        if b.requires_grad:
            b.accumulate_grad(a.data.T @ g)

    return make_node(out, (a, b), backward)


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x @ w.T + b, the usual fully connected layer (w is out x in)."""
    out = matmul(x, transpose2d(w))
    if b is not None:
        out = add(out, b)
    return out


# ---------------------------------------------------------------------------
# reductions (float64 accumulation)


def sum_all(a: Tensor) -> Tensor:
    out = np.float32(a.data.sum(dtype=np.float64))

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(np.full_like(a.data, np.float32(g)))

    return make_node(out, (a,), backward)


def mean_all(a: Tensor) -> Tensor:
    n = a.data.size
    if n == 0:
        raise DomainError("mean of an empty tensor")
    out = np.float32(a.data.sum(dtype=np.float64) / n)

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(np.full_like(a.data, np.float32(g) / np.float32(n)))

    return make_node(out, (a,), backward)


def l2_normalize_rows(a: Tensor, eps: float = 1e-12) -> Tensor:
    """Scale each row of a matrix to unit L2 norm.

    Rows with norm below ``eps`` are left divided by ``eps`` instead (and
    logged), so the output stays finite for degenerate input.
    """
    if a.ndim != 2:
        raise ShapeError(f"l2_normalize_rows needs a matrix, got shape {a.shape}")
    sq = np.sum(a.data.astype(np.float64) ** 2, axis=1, keepdims=True)
    norm = np.sqrt(sq)
    if np.any(norm < eps):
        log.warning("l2_normalize_rows: %d zero-norm rows guarded", int(np.sum(norm < eps)))
    denom = np.maximum(norm, eps)
    out = (a.data / denom).astype(np.float32)

    def backward(g):
        if a.requires_grad:
            g64 = g.astype(np.float64)
            y = out.astype(np.float64)
            dot = np.sum(g64 * y, axis=1, keepdims=True)
            a.accumulate_grad(((g64 - y * dot) / denom).astype(np.float32))

    return make_node(out, (a,), backward)


def softmax_cross_entropy_rows(logits: Tensor, targets) -> Tensor:
    """Mean over rows of -log softmax(row)[target], max-stabilized.

    ``targets`` is a sequence of column indices, one per row.
    """
    if logits.ndim != 2:
        raise ShapeError(f"logits must be a matrix, got shape {logits.shape}")
    n, m = logits.shape
    if n == 0:
        raise DomainError("empty batch in cross entropy")
    t = np.asarray(targets, dtype=np.int64)
    if t.shape != (n,):
        raise ShapeError(f"need {n} targets, got shape {t.shape}")
    if np.any(t < 0) or np.any(t >= m):
        raise DomainError(f"target index outside [0, {m})")
    z = logits.data.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    se = ez.sum(axis=1, keepdims=True)
    logp = z - np.log(se)
    loss = np.float32(-logp[np.arange(n), t].mean())
    softmax = (ez / se).astype(np.float32)

    def backward(g):
        if logits.requires_grad:
            gz = softmax.copy()
            gz[np.arange(n), t] -= 1.0
            logits.accumulate_grad(gz * (np.float32(g) / np.float32(n)))

    return make_node(loss, (logits,), backward)

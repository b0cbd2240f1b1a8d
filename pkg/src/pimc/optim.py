"""Adam with bias correction and L2 weight decay folded into the gradient."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, ShapeError
from .tensor import Tensor


@dataclass
class AdamState:
    """Moments and hyperparameters for one parameter group.

    Weight decay is applied as an additive ``weight_decay * theta`` term in
    the gradient before the moment updates (classic L2, not decoupled).
    """

    lr: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lr <= 0:
            raise DomainError(f"learning rate must be positive, got {self.lr}")
        if self.weight_decay < 0:
            raise DomainError(f"weight decay must be non-negative, got {self.weight_decay}")


def adam_step(params: dict[str, Tensor], state: AdamState) -> None:
    """One in-place Adam update over a named parameter dict.

    Parameters with no accumulated gradient are treated as zero-gradient
    (their moments still decay). A non-finite gradient anywhere rejects the
    whole update.
    """
    for name, p in params.items():
        g = p.grad
        if g is None:
            g = np.zeros_like(p.data)
        elif g.shape != p.data.shape:
            raise ShapeError(f"{name}: gradient shape {g.shape} != parameter shape {p.data.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for parameter '{name}'; update rejected")
        if name not in state.first_moment:
            state.first_moment[name] = np.zeros_like(p.data)
            state.second_moment[name] = np.zeros_like(p.data)

    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for name, p in params.items():
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if state.weight_decay:
            g = g + np.float32(state.weight_decay) * p.data
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        mhat = m / bc1
        vhat = v / bc2
        p.data -= (state.lr * mhat / (np.sqrt(vhat) + state.eps)).astype(np.float32)
        p.grad = None

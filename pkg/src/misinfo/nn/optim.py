"""Adam with bias correction, plus gradient utilities."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .tensor import Parameter

__all__ = ["adam_step", "clip_global_norm", "zero_grads"]


def zero_grads(params: Sequence[Parameter]):
    for p in params:
        p.grad = None


def clip_global_norm(params: Sequence[Parameter], max_norm: float) -> float:
    """Scale all gradients down so their joint L2 norm is at most max_norm."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(p.grad.astype(np.float64) ** 2))
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad = p.grad * scale
    return norm


def adam_step(params: Sequence[Parameter], lr: float,
              betas: tuple = (0.9, 0.999), eps: float = 1e-8):
    """Apply one bias-corrected Adam update in place and zero the gradients.

    Parameters with no accumulated gradient are left untouched.
    """
    b1, b2 = betas
    for p in params:
        g = p.grad
        if g is None:
            continue
        if p.m is None:
            p.m = np.zeros_like(p.data)
            p.v = np.zeros_like(p.data)
        p.step += 1
        p.m = b1 * p.m + (1.0 - b1) * g
        p.v = b2 * p.v + (1.0 - b2) * g * g
        m_hat = p.m / (1.0 - b1**p.step)
        v_hat = p.v / (1.0 - b2**p.step)
        p.data = p.data - lr * m_hat / (np.sqrt(v_hat) + eps)
        p.grad = None

"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .optim import zero_grads
from .tensor import Parameter, Tensor

__all__ = ["gradient_check", "relative_error"]

# Below this magnitude both gradients count as zero: central differences on
# float64 carry ~1e-11 rounding noise, which would otherwise read as a 100%
# relative error against a structurally-zero analytic gradient (e.g. the
# attention key bias, which softmax cancels exactly).
_ATOL = 1e-8


def relative_error(analytic: float, numeric: float, atol: float = _ATOL) -> float:
    """|a - n| scaled by the larger magnitude; near-zero pairs agree."""
    if abs(analytic) < atol and abs(numeric) < atol:
        return 0.0
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric))


def gradient_check(loss_fn: Callable[[], Tensor], params: Sequence[Parameter],
                   eps: float = 1e-5) -> float:
    """Worst relative error between analytic and central-difference gradients.

    ``loss_fn`` must rebuild the forward graph on every call and be
    deterministic (run dropout in eval mode). Parameters should hold float64
    data; float32 round-off swamps the thresholds this is used with.
    """
    zero_grads(params)
    loss = loss_fn()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy()
                for p in params]
    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            up = float(loss_fn().data)
            flat[i] = saved - eps
            down = float(loss_fn().data)
            flat[i] = saved
            numeric = (up - down) / (2.0 * eps)
            err = relative_error(float(grad.reshape(-1)[i]), numeric)
            if err > worst:
                worst = err
    zero_grads(params)
    return worst

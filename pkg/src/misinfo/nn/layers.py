"""Neural layers built on the autodiff tensor.

Weight matrices initialize uniform on ±sqrt(6/(fan_in+fan_out)), biases at
zero; LSTM forget-gate biases start at 1.0. Sequence layers take a boolean
mask marking real (non-padding) positions and guarantee padded positions
never influence the output.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .tensor import Parameter, Tensor, concat, dropout, take

__all__ = [
    "Module", "Linear", "Embedding", "LayerNorm", "Dropout",
    "LSTMCell", "lstm_cell_step", "LSTM", "BiLSTM", "AdditiveAttention",
    "Conv1D", "max_over_time", "scaled_dot_attention",
    "MultiHeadSelfAttention", "FeedForward", "EncoderBlock", "glorot",
]


def glorot(rng: np.random.Generator, shape: tuple, dtype=np.float32) -> np.ndarray:
    fan_in = int(np.prod(shape[:-1])) if len(shape) > 1 else shape[0]
    fan_out = shape[-1]
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Module:
    """Composite of parameters and sub-modules; traversal order is the
    attribute insertion order, with shared objects reported once."""

    training: bool = True

    def named_parameters(self, prefix: str = "", _seen=None) -> list:
        if _seen is None:
            _seen = set()
        found = []
        for attr, value in vars(self).items():
            items = []
            if isinstance(value, (list, tuple)):
                items = [(f"{attr}.{i}", v) for i, v in enumerate(value)]
            else:
                items = [(attr, value)]
            for name, obj in items:
                if isinstance(obj, Parameter):
                    if id(obj) not in _seen:
                        _seen.add(id(obj))
                        found.append((prefix + name, obj))
                elif isinstance(obj, Module):
                    if id(obj) not in _seen:
                        _seen.add(id(obj))
                        found.extend(obj.named_parameters(prefix + name + ".", _seen))
        return found

    def parameters(self) -> list:
        return [p for _, p in self.named_parameters()]

    def modules(self) -> list:
        out = [self]
        seen = {id(self)}
        stack = [self]
        while stack:
            mod = stack.pop()
            for value in vars(mod).values():
                children = value if isinstance(value, (list, tuple)) else [value]
                for child in children:
                    if isinstance(child, Module) and id(child) not in seen:
                        seen.add(id(child))
                        out.append(child)
                        stack.append(child)
        return out

    def train_mode(self, flag: bool = True):
        for mod in self.modules():
            mod.training = flag
        return self

    def eval_mode(self):
        return self.train_mode(False)

    def num_params(self) -> int:
        return sum(p.data.size for p in self.parameters())


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, dtype=np.float32):
        self.W = Parameter(glorot(rng, (d_in, d_out), dtype))
        self.b = Parameter(np.zeros(d_out, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.W.shape[0]:
            raise ValueError(f"expected last dim {self.W.shape[0]}, got {x.shape[-1]}")
        return x @ self.W + self.b


class Embedding(Module):
    def __init__(self, count: int, dim: int, rng: np.random.Generator, dtype=np.float32):
        self.W = Parameter(glorot(rng, (count, dim), dtype))

    def __call__(self, ids: np.ndarray) -> Tensor:
        return take(self.W, ids)


class LayerNorm(Module):
    """Normalize the last axis to zero mean and unit variance, then scale."""

    def __init__(self, dim: int, eps: float = 1e-5, dtype=np.float32):
        self.gamma = Parameter(np.ones(dim, dtype=dtype))
        self.beta = Parameter(np.zeros(dim, dtype=dtype))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        inv = (var + self.eps).pow(-0.5)
        return centered * inv * self.gamma + self.beta


class Dropout(Module):
    def __init__(self, rate: float, rng: np.random.Generator):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng

    def __call__(self, x: Tensor) -> Tensor:
        return dropout(x, self.rate, self.rng, self.training)


class LSTMCell(Module):
    """Gates ordered input, forget, candidate, output in the fused matrices."""

    def __init__(self, d_in: int, d_hidden: int, rng: np.random.Generator, dtype=np.float32):
        self.Wx = Parameter(glorot(rng, (d_in, 4 * d_hidden), dtype))
        self.Wh = Parameter(glorot(rng, (d_hidden, 4 * d_hidden), dtype))
        bias = np.zeros(4 * d_hidden, dtype=dtype)
        bias[d_hidden : 2 * d_hidden] = 1.0  # forget gate open at start
        self.b = Parameter(bias)
        self.d_hidden = d_hidden

    def __call__(self, x: Tensor, h_prev: Tensor, c_prev: Tensor) -> tuple:
        h = self.d_hidden
        z = x @ self.Wx + h_prev @ self.Wh + self.b
        i = z[:, :h].sigmoid()
        f = z[:, h : 2 * h].sigmoid()
        g = z[:, 2 * h : 3 * h].tanh()
        o = z[:, 3 * h :].sigmoid()
        c = f * c_prev + i * g
        return o * c.tanh(), c


def lstm_cell_step(cell: LSTMCell, x: Tensor, h_prev: Tensor, c_prev: Tensor) -> tuple:
    """One recurrence step; returns (h, c)."""
    return cell(x, h_prev, c_prev)


def _masked_carry(new: Tensor, prev: Tensor, keep: np.ndarray) -> Tensor:
    # keep is a float column vector: 1 where the step consumed a real token
    return new * Tensor(keep) + prev * Tensor(1.0 - keep)


class LSTM(Module):
    """Unidirectional recurrence over [batch, time, features].

    The state carries through padded steps unchanged, so the final state is
    the state at each sequence's last real token.
    """

    def __init__(self, d_in: int, d_hidden: int, rng: np.random.Generator, dtype=np.float32):
        self.cell = LSTMCell(d_in, d_hidden, rng, dtype)
        self.d_hidden = d_hidden
        self.dtype = dtype

    def __call__(self, x: Tensor, mask: np.ndarray, reverse: bool = False) -> tuple:
        batch, steps, _ = x.shape
        h = Tensor(np.zeros((batch, self.d_hidden), dtype=self.dtype))
        c = Tensor(np.zeros((batch, self.d_hidden), dtype=self.dtype))
        outputs: list[Optional[Tensor]] = [None] * steps
        order = range(steps - 1, -1, -1) if reverse else range(steps)
        for t in order:
            keep = mask[:, t : t + 1].astype(self.dtype)
            h_new, c_new = self.cell(x[:, t, :], h, c)
            h = _masked_carry(h_new, h, keep)
            c = _masked_carry(c_new, c, keep)
            outputs[t] = h.reshape(batch, 1, self.d_hidden)
        return concat(outputs, axis=1), h


class BiLSTM(Module):
    """Forward and backward recurrences concatenated per position."""

    def __init__(self, d_in: int, d_hidden: int, rng: np.random.Generator, dtype=np.float32):
        self.fwd = LSTM(d_in, d_hidden, rng, dtype)
        self.bwd = LSTM(d_in, d_hidden, rng, dtype)

    def __call__(self, x: Tensor, mask: np.ndarray) -> tuple:
        out_f, last_f = self.fwd(x, mask)
        out_b, last_b = self.bwd(x, mask, reverse=True)
        return concat([out_f, out_b], axis=2), concat([last_f, last_b], axis=1)


class AdditiveAttention(Module):
    """Scores each position with v·tanh(Wh + b), softmaxed over real positions."""

    def __init__(self, d_in: int, d_attn: int, rng: np.random.Generator, dtype=np.float32):
        self.proj = Linear(d_in, d_attn, rng, dtype)
        self.v = Parameter(glorot(rng, (d_attn, 1), dtype))

    def __call__(self, states: Tensor, mask: np.ndarray) -> tuple:
        batch, steps, _ = states.shape
        scores = (self.proj(states).tanh() @ self.v).reshape(batch, steps)
        scores = scores.masked_fill(~mask, -np.inf)
        weights = scores.softmax(axis=-1)
        context = (states * weights.reshape(batch, steps, 1)).sum(axis=1)
        return context, weights.data


class Conv1D(Module):
    """Valid 1-d convolution over time, expressed as shifted-slice matmul."""

    def __init__(self, d_in: int, width: int, filters: int, rng: np.random.Generator,
                 dtype=np.float32):
        if width < 1 or filters < 1:
            raise ValueError(f"bad conv geometry width={width} filters={filters}")
        self.W = Parameter(glorot(rng, (width * d_in, filters), dtype))
        self.b = Parameter(np.zeros(filters, dtype=dtype))
        self.width = width

    def __call__(self, x: Tensor) -> Tensor:
        batch, steps, d = x.shape
        w = self.width
        if steps < w:
            raise ValueError(f"sequence length {steps} shorter than kernel width {w}")
        windows = concat([x[:, i : steps - w + 1 + i, :] for i in range(w)], axis=2)
        return windows @ self.W + self.b


def max_over_time(x: Tensor, valid: np.ndarray, fill: float) -> Tensor:
    """Per-filter max over valid time positions; invalid ones get ``fill``.

    ``fill`` must undercut every reachable activation (e.g. -1.0 after ReLU,
    -2.0 after tanh-bounded outputs) so masked positions never win.
    """
    if not valid.any(axis=1).all():
        raise ValueError("every sequence needs at least one valid position")
    masked = x.masked_fill(~valid[:, :, None], fill)
    return masked.max(axis=1)


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor,
                         mask: Optional[np.ndarray] = None) -> tuple:
    """softmax(q kᵀ / sqrt(d_k)) v for one sequence; masked keys get zero weight."""
    d_k = q.shape[-1]
    if mask is not None and not np.asarray(mask).any():
        raise ValueError("attention needs at least one unmasked key")
    scores = (q @ k.swapaxes(-1, -2)) * (1.0 / math.sqrt(d_k))
    if mask is not None:
        scores = scores.masked_fill(~np.asarray(mask), -np.inf)
    weights = scores.softmax(axis=-1)
    return weights @ v, weights.data


class MultiHeadSelfAttention(Module):
    """Batched multi-head self-attention with optional relative-position bias."""

    def __init__(self, d_model: int, heads: int, rng: np.random.Generator,
                 clip_distance: int = 8, relative: bool = False, dtype=np.float32):
        if d_model % heads:
            raise ValueError(f"{heads} heads do not divide d_model={d_model}")
        self.wq = Linear(d_model, d_model, rng, dtype)
        self.wk = Linear(d_model, d_model, rng, dtype)
        self.wv = Linear(d_model, d_model, rng, dtype)
        self.wo = Linear(d_model, d_model, rng, dtype)
        self.heads = heads
        self.d_head = d_model // heads
        self.clip_distance = clip_distance
        # one learned logit bias per clipped offset and head
        self.rel_bias = (
            Parameter(np.zeros((2 * clip_distance + 1, heads), dtype=dtype))
            if relative else None
        )

    def _split(self, x: Tensor, batch: int, steps: int) -> Tensor:
        return x.reshape(batch, steps, self.heads, self.d_head).transpose(0, 2, 1, 3)

    def __call__(self, x: Tensor, mask: np.ndarray) -> tuple:
        batch, steps, d_model = x.shape
        q = self._split(self.wq(x), batch, steps)
        k = self._split(self.wk(x), batch, steps)
        v = self._split(self.wv(x), batch, steps)
        scores = (q @ k.swapaxes(-1, -2)) * (1.0 / math.sqrt(self.d_head))
        if self.rel_bias is not None:
            pos = np.arange(steps)
            offsets = np.clip(pos[:, None] - pos[None, :],
                              -self.clip_distance, self.clip_distance) + self.clip_distance
            bias = take(self.rel_bias, offsets).transpose(2, 0, 1)  # heads×T×T
            scores = scores + bias
        key_mask = mask[:, None, None, :]  # batch×1×1×T over keys
        scores = scores.masked_fill(~key_mask, -np.inf)
        weights = scores.softmax(axis=-1)
        out = (weights @ v).transpose(0, 2, 1, 3).reshape(batch, steps, d_model)
        return self.wo(out), weights.data


class FeedForward(Module):
    def __init__(self, d_model: int, d_ffn: int, rng: np.random.Generator, dtype=np.float32):
        self.lift = Linear(d_model, d_ffn, rng, dtype)
        self.proj = Linear(d_ffn, d_model, rng, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return self.proj(self.lift(x).gelu())


class EncoderBlock(Module):
    """Self-attention and feed-forward sublayers, residual then layer norm."""

    def __init__(self, d_model: int, heads: int, d_ffn: int, drop: float,
                 rng: np.random.Generator, relative: bool = False,
                 clip_distance: int = 8, dtype=np.float32):
        self.attn = MultiHeadSelfAttention(d_model, heads, rng,
                                           clip_distance=clip_distance,
                                           relative=relative, dtype=dtype)
        self.norm_attn = LayerNorm(d_model, dtype=dtype)
        self.ffn = FeedForward(d_model, d_ffn, rng, dtype)
        self.norm_ffn = LayerNorm(d_model, dtype=dtype)
        self.drop = Dropout(drop, rng)

    def __call__(self, x: Tensor, mask: np.ndarray) -> tuple:
        attended, weights = self.attn(x, mask)
        x = self.norm_attn(x + self.drop(attended))
        x = self.norm_ffn(x + self.drop(self.ffn(x)))
        return x, weights

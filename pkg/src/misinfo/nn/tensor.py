"""Reverse-mode automatic differentiation over numpy arrays.

A Tensor records the operation that produced it; ``backward()`` walks the
graph once in reverse topological order (iteratively, so recurrent chains of
any length work) and accumulates gradients into every node that requires
them. Training code runs in float32; gradient checks build float64 graphs.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy import special

__all__ = [
    "Tensor", "Parameter", "concat", "take", "softmax_cross_entropy", "dropout",
]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the source shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """N-d array plus the bookkeeping needed for reverse-mode gradients."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data)
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float32)
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._backward = None

    # graph construction -------------------------------------------------
    @classmethod
    def _op(cls, data: np.ndarray, parents: Sequence["Tensor"], backward) -> "Tensor":
        out = cls(data)
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = tuple(parents)
            out._backward = backward
        return out

    def _accum(self, grad: np.ndarray):
        if not self.requires_grad:
            return
        grad = _unbroadcast(np.asarray(grad), self.data.shape)
        self.grad = grad if self.grad is None else self.grad + grad

    def backward(self, grad=None):
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a gradient needs a scalar")
            grad = np.ones_like(self.data)
        # Iterative DFS postorder. Nodes are marked visited when popped (not
        # when pushed) so reconvergent paths still emit a true topological
        # order; duplicate pending entries are skipped on the visited check.
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self._accum(np.asarray(grad, dtype=self.data.dtype))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # conveniences --------------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"

    @staticmethod
    def _ensure(x) -> "Tensor":
        return x if isinstance(x, Tensor) else Tensor(x)

    # arithmetic ----------------------------------------------------------
    # Python-number operands stay raw (weak promotion keeps float32 graphs
    # in float32); array operands get wrapped as constant tensors.
    def __add__(self, other):
        if isinstance(other, (int, float)):
            def backward(g):
                self._accum(g)

            return Tensor._op(self.data + other, (self,), backward)
        other = self._ensure(other)
        out_data = self.data + other.data

        def backward(g):
            self._accum(g)
            other._accum(g)

        return Tensor._op(out_data, (self, other), backward)

    __radd__ = __add__

    def __neg__(self):
        def backward(g):
            self._accum(-g)

        return Tensor._op(-self.data, (self,), backward)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return self + (-other)
        return self + (-self._ensure(other))

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            def backward(g):
                self._accum(g * other)

            return Tensor._op(self.data * other, (self,), backward)
        other = self._ensure(other)
        out_data = self.data * other.data

        def backward(g):
            self._accum(g * other.data)
            other._accum(g * self.data)

        return Tensor._op(out_data, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return self * other.pow(-1.0)
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.pow(-1.0) * other

    def pow(self, exponent: float) -> "Tensor":
        out_data = self.data**exponent

        def backward(g):
            self._accum(g * exponent * self.data ** (exponent - 1.0))

        return Tensor._op(out_data, (self,), backward)

    __pow__ = pow

    def sqrt(self) -> "Tensor":
        return self.pow(0.5)

    def __matmul__(self, other):
        other = self._ensure(other)
        out_data = self.data @ other.data

        def backward(g):
            a, b = self.data, other.data
            if a.ndim == 1 or b.ndim == 1:
                raise ValueError("matmul backward needs ≥2-d operands")
            self._accum(g @ np.swapaxes(b, -1, -2))
            other._accum(np.swapaxes(a, -1, -2) @ g)

        return Tensor._op(out_data, (self, other), backward)

    # reductions ----------------------------------------------------------
    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out_data = self.data.sum(axis=axis, keepdims=keepdims)

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self._accum(np.broadcast_to(g, self.data.shape))

        return Tensor._op(out_data, (self,), backward)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def max(self, axis: int, keepdims: bool = False) -> "Tensor":
        """Max along one axis; gradient routes to the first argmax."""
        idx = np.argmax(self.data, axis=axis)
        out_data = np.take_along_axis(self.data, np.expand_dims(idx, axis), axis)
        if not keepdims:
            out_data = np.squeeze(out_data, axis)

        def backward(g):
            if not keepdims:
                g = np.expand_dims(g, axis)
            buf = np.zeros_like(self.data)
            np.put_along_axis(buf, np.expand_dims(idx, axis), g, axis)
            self._accum(buf)

        return Tensor._op(out_data, (self,), backward)

    # elementwise nonlinearities -------------------------------------------
    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)

        def backward(g):
            self._accum(g * out_data)

        return Tensor._op(out_data, (self,), backward)

    def log(self) -> "Tensor":
        def backward(g):
            self._accum(g / self.data)

        return Tensor._op(np.log(self.data), (self,), backward)

    def tanh(self) -> "Tensor":
        out_data = np.tanh(self.data)

        def backward(g):
            self._accum(g * (1.0 - out_data**2))

        return Tensor._op(out_data, (self,), backward)

    def sigmoid(self) -> "Tensor":
        out_data = special.expit(self.data)

        def backward(g):
            self._accum(g * out_data * (1.0 - out_data))

        return Tensor._op(out_data, (self,), backward)

    def relu(self) -> "Tensor":
        out_data = np.maximum(self.data, 0)

        def backward(g):
            self._accum(g * (self.data > 0))

        return Tensor._op(out_data, (self,), backward)

    def gelu(self) -> "Tensor":
        """Exact (erf-based) Gaussian error linear unit."""
        x = self.data
        cdf = 0.5 * (1.0 + special.erf(x / math.sqrt(2.0)))
        out_data = x * cdf

        def backward(g):
            pdf = np.exp(-0.5 * x**2) / math.sqrt(2.0 * math.pi)
            self._accum(g * (cdf + x * pdf))

        return Tensor._op(out_data, (self,), backward)

    # shape manipulation ----------------------------------------------------
    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out_data = self.data.reshape(shape)

        def backward(g):
            self._accum(g.reshape(self.data.shape))

        return Tensor._op(out_data, (self,), backward)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inverse = np.argsort(axes)

        def backward(g):
            self._accum(np.transpose(g, inverse))

        return Tensor._op(np.transpose(self.data, axes), (self,), backward)

    def swapaxes(self, a: int, b: int) -> "Tensor":
        def backward(g):
            self._accum(np.swapaxes(g, a, b))

        return Tensor._op(np.swapaxes(self.data, a, b), (self,), backward)

    def __getitem__(self, key) -> "Tensor":
        out_data = self.data[key]

        def backward(g):
            buf = np.zeros_like(self.data)
            np.add.at(buf, key, g)
            self._accum(buf)

        return Tensor._op(out_data, (self,), backward)

    def masked_fill(self, mask: np.ndarray, value: float) -> "Tensor":
        """Replace entries where ``mask`` is True by a constant."""
        out_data = np.where(mask, np.asarray(value, dtype=self.data.dtype), self.data)

        def backward(g):
            self._accum(np.where(mask, 0.0, g))

        return Tensor._op(out_data, (self,), backward)

    def softmax(self, axis: int = -1) -> "Tensor":
        """Numerically stable softmax along one axis.

        Entries equal to -inf get exactly zero probability; a slice must keep
        at least one finite entry.
        """
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        out_data = e / e.sum(axis=axis, keepdims=True)

        def backward(g):
            inner = (g * out_data).sum(axis=axis, keepdims=True)
            self._accum(out_data * (g - inner))

        return Tensor._op(out_data, (self,), backward)


class Parameter(Tensor):
    """Trainable tensor with Adam moment slots."""

    __slots__ = ("m", "v", "step")

    def __init__(self, data):
        super().__init__(data, requires_grad=True)
        self.m: Optional[np.ndarray] = None
        self.v: Optional[np.ndarray] = None
        self.step = 0


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            t._accum(g[tuple(index)])

    return Tensor._op(out_data, tensors, backward)


def take(weights: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather (embedding lookup); gradient scatters back with repeats."""
    ids = np.asarray(ids)
    out_data = weights.data[ids]

    def backward(g):
        buf = np.zeros_like(weights.data)
        np.add.at(buf, ids, g)
        weights._accum(buf)

    return Tensor._op(out_data, (weights,), backward)


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray) -> tuple[Tensor, np.ndarray]:
    """Mean negative log-likelihood of integer targets under row softmax.

    Returns the scalar loss and the probability rows (plain array, outside
    the graph). Fused so the gradient is the clean ``(p - onehot) / n`` form.
    """
    targets = np.asarray(targets)
    n, c = logits.data.shape
    if targets.shape != (n,):
        raise ValueError(f"expected {n} targets, got shape {targets.shape}")
    if targets.min() < 0 or targets.max() >= c:
        raise ValueError(f"target out of range for {c} classes")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    probs = np.exp(log_probs)
    loss_value = -log_probs[np.arange(n), targets].mean()

    def backward(g):
        grad = probs.copy()
        grad[np.arange(n), targets] -= 1.0
        logits._accum(g * grad / n)

    loss = Tensor._op(np.asarray(loss_value, dtype=logits.data.dtype), (logits,), backward)
    return loss, probs


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: identity when evaluating or when rate is 0."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    keep = (rng.random(x.data.shape) >= rate).astype(x.data.dtype) / (1.0 - rate)
    return x * Tensor(keep)

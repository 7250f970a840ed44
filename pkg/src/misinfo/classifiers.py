"""Linear baselines and a feed-forward network over document vectors.

Margin models encode fake as +1 and real as -1. Probability vectors follow
the package-wide (P(fake), P(real)) order. Finished models hold float32
weights so archives round-trip bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import sparse
from scipy.special import expit

from .corpus import CLASS_ORDER, FAKE, REAL
from .errors import DataError
from .features import SparseVector
from .nn import Linear, Module, Tensor, adam_step, softmax_cross_entropy

LINEAR_KINDS = ("logreg", "svm_hinge", "pac")
FEATURE_MODES = ("tfidf", "weighted_embedding")

FeatureVector = Union[SparseVector, np.ndarray]

_SIGN = {FAKE: 1.0, REAL: -1.0}
_CLASS_INDEX = {label: i for i, label in enumerate(CLASS_ORDER)}


def _check_labels(labels: Sequence[str]):
    if not labels:
        raise DataError("training data is empty")
    present = set(labels)
    missing = [c for c in CLASS_ORDER if c not in present]
    if missing:
        raise DataError(f"training data lacks class(es): {', '.join(missing)}")


def _dim_of(x: FeatureVector) -> int:
    return x.dimension if isinstance(x, SparseVector) else x.shape[-1]


def _score(w: np.ndarray, b: float, x: FeatureVector) -> float:
    if isinstance(x, SparseVector):
        return x.dot_dense(w) + b
    return float(w @ x) + b


@dataclass
class LinearModel:
    """Single weight vector with a logistic link for probabilities."""

    kind: str
    weights: np.ndarray
    bias: float = 0.0
    feature_mode: str = "tfidf"

    def __post_init__(self):
        if self.kind not in LINEAR_KINDS:
            raise ValueError(f"unknown linear kind {self.kind!r}")
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature mode {self.feature_mode!r}")

    @property
    def dimension(self) -> int:
        return self.weights.shape[0]

    def score(self, x: FeatureVector) -> float:
        if _dim_of(x) != self.dimension:
            raise ValueError(f"feature dim {_dim_of(x)} != model dim {self.dimension}")
        return _score(self.weights, self.bias, x)


def train_linear(kind: str, data: Sequence[tuple], epochs: int = 20, lr: float = 0.1,
                 C: float = 1.0, seed: int = 0, feature_mode: str = "tfidf") -> LinearModel:
    """Seeded per-epoch-shuffled SGD for the three margin/log-loss baselines.

    logreg minimizes log-loss, svm_hinge the hinge loss plus an L2 term with
    lambda = 1/(C*n), and pac applies the bounded aggressive update
    tau = min(C, loss/|x|^2) on every margin violation (no bias term).
    """
    if kind not in LINEAR_KINDS:
        raise ValueError(f"unknown linear kind {kind!r}")
    labels = [label for _, label in data]
    _check_labels(labels)
    dim = _dim_of(data[0][0])
    n = len(data)
    w = np.zeros(dim)
    b = 0.0
    lam = 1.0 / (C * n)
    rng = np.random.default_rng(seed)
    order = np.arange(n)
    for _ in range(epochs):
        rng.shuffle(order)
        for i in order:
            x, label = data[i]
            y = _SIGN[label]
            s = _score(w, b, x)
            if kind == "logreg":
                # d/ds log(1+exp(-ys)) = -y*sigmoid(-ys)
                g = -y * expit(-y * s)
                if isinstance(x, SparseVector):
                    w[x.indices] -= lr * g * x.values
                else:
                    w -= lr * g * x
                b -= lr * g
            elif kind == "svm_hinge":
                w *= 1.0 - lr * lam
                if y * s < 1.0:
                    if isinstance(x, SparseVector):
                        w[x.indices] += lr * y * x.values
                    else:
                        w += lr * y * x
                    b += lr * y
            else:  # pac
                loss = max(0.0, 1.0 - y * s)
                if loss > 0.0:
                    sq = float(np.sum(x.values**2)) if isinstance(x, SparseVector) \
                        else float(x @ x)
                    if sq > 0.0:
                        tau = min(C, loss / sq)
                        if isinstance(x, SparseVector):
                            w[x.indices] += tau * y * x.values
                        else:
                            w += tau * y * x
    return LinearModel(kind, w.astype(np.float32),
                       0.0 if kind == "pac" else float(np.float32(b)), feature_mode)


def pa_update(w: np.ndarray, x: np.ndarray, y: float, C: float = 1.0) -> tuple:
    """One passive-aggressive step on dense features; returns (w', tau)."""
    loss = max(0.0, 1.0 - y * float(w @ x))
    if loss == 0.0:
        return w.copy(), 0.0
    sq = float(x @ x)
    if sq == 0.0:
        return w.copy(), 0.0
    tau = min(C, loss / sq)
    return w + tau * y * x, tau


def _sparse_affine(x_csr: sparse.csr_matrix, lin: Linear) -> Tensor:
    """Affine layer whose input is a constant CSR matrix."""
    out_data = (x_csr @ lin.W.data) + lin.b.data

    def backward(g):
        lin.W._accum(x_csr.T @ g)
        lin.b._accum(g.sum(axis=0))

    return Tensor._op(out_data, (lin.W, lin.b), backward)


class MlpModel(Module):
    """ReLU stack ending in a 2-class softmax."""

    def __init__(self, dim: int, hidden: Sequence[int], rng: np.random.Generator,
                 feature_mode: str = "tfidf"):
        if any(h <= 0 for h in hidden):
            raise ValueError(f"hidden sizes must be positive: {hidden}")
        sizes = [dim] + list(hidden) + [len(CLASS_ORDER)]
        self.layers = [Linear(a, z, rng) for a, z in zip(sizes[:-1], sizes[1:])]
        self.dim = dim
        self.hidden = tuple(hidden)
        self.feature_mode = feature_mode

    def logits(self, x) -> Tensor:
        """x is a dense array or a scipy CSR batch."""
        if sparse.issparse(x):
            out = _sparse_affine(x.astype(np.float32), self.layers[0])
        else:
            out = self.layers[0](Tensor(np.asarray(x, dtype=np.float32)))
        for layer in self.layers[1:]:
            out = layer(out.relu())
        return out


def _as_batch(xs: Sequence[FeatureVector]):
    """Stack feature vectors into a CSR or dense batch."""
    if isinstance(xs[0], SparseVector):
        dim = xs[0].dimension
        data = np.concatenate([x.values for x in xs]) if xs else np.empty(0)
        indices = np.concatenate([x.indices for x in xs]) if xs else np.empty(0, np.int64)
        indptr = np.cumsum([0] + [len(x.indices) for x in xs])
        return sparse.csr_matrix((data, indices, indptr), shape=(len(xs), dim))
    return np.stack([np.asarray(x) for x in xs])


def train_mlp(data: Sequence[tuple], hidden: Sequence[int] = (256,), epochs: int = 20,
              lr: float = 1e-3, batch: int = 64, seed: int = 0,
              feature_mode: str = "tfidf") -> MlpModel:
    """Minibatch Adam on softmax cross-entropy; deterministic under a seed."""
    labels = [label for _, label in data]
    _check_labels(labels)
    rng = np.random.default_rng(seed)
    model = MlpModel(_dim_of(data[0][0]), hidden, rng, feature_mode)
    targets = np.array([_CLASS_INDEX[label] for label in labels])
    n = len(data)
    order = np.arange(n)
    params = model.parameters()
    for _ in range(epochs):
        rng.shuffle(order)
        for lo in range(0, n, batch):
            idx = order[lo : lo + batch]
            xb = _as_batch([data[i][0] for i in idx])
            loss, _ = softmax_cross_entropy(model.logits(xb), targets[idx])
            loss.backward()
            adam_step(params, lr)
    return model


def predict_proba(model, x: FeatureVector) -> np.ndarray:
    """(P(fake), P(real)) for one feature vector."""
    if isinstance(model, LinearModel):
        p_fake = float(expit(model.score(x)))
        return np.array([p_fake, 1.0 - p_fake])
    if isinstance(model, MlpModel):
        if _dim_of(x) != model.dim:
            raise ValueError(f"feature dim {_dim_of(x)} != model dim {model.dim}")
        logits = model.logits(_as_batch([x])).data[0].astype(np.float64)
        e = np.exp(logits - logits.max())
        return e / e.sum()
    raise TypeError(f"unsupported model type {type(model).__name__}")


def predict_label(model, x: FeatureVector) -> str:
    p = predict_proba(model, x)
    return FAKE if p[0] >= p[1] else REAL

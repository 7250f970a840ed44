"""Recurrent and convolutional sentence classifiers over token sequences.

Four architectures share one contract: embed tokens, reduce the sequence to
a fixed vector, classify with a dense softmax head. Padding positions are
masked out of every reduction, so batch layout never changes predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import CLASS_ORDER
from .errors import DataError
from .features import EmbeddingTable
from .nn import (AdditiveAttention, BiLSTM, Conv1D, Dropout, Embedding, LSTM,
                 Linear, Module, Tensor, adam_step, clip_global_norm, concat,
                 glorot, max_over_time, softmax_cross_entropy, zero_grads)

ARCHS = ("lstm", "bilstm_attn", "cnn", "cnn_bilstm")

PAD, UNK, CLS = 0, 1, 2
N_RESERVED = 3

_CLASS_INDEX = {label: i for i, label in enumerate(CLASS_ORDER)}


@dataclass(frozen=True)
class TokenIndex:
    """Token-to-id table with reserved padding/unknown/class-marker slots."""

    ids: dict

    def __post_init__(self):
        for tok, i in self.ids.items():
            if i < N_RESERVED:
                raise ValueError(f"token {tok!r} uses reserved id {i}")

    @property
    def size(self) -> int:
        return N_RESERVED + len(self.ids)

    def encode(self, tokens: Sequence[str], max_len: int, add_cls: bool = False) -> list[int]:
        """Id sequence, truncated to max_len; empty input maps to one UNK."""
        out = [CLS] if add_cls else []
        for tok in tokens:
            if len(out) >= max_len:
                break
            out.append(self.ids.get(tok, UNK))
        if len(out) == (1 if add_cls else 0):
            out.append(UNK)
        return out

    def to_dict(self) -> dict:
        ordered = sorted(self.ids, key=self.ids.get)
        return {"tokens": ordered}

    @classmethod
    def from_dict(cls, d) -> "TokenIndex":
        return cls({tok: N_RESERVED + i for i, tok in enumerate(d["tokens"])})


def build_token_index(token_seqs: Sequence, max_size: int = 50_000) -> TokenIndex:
    """Keep the most frequent tokens (ties lexicographic), ids in lex order."""
    if max_size <= 0:
        raise ValueError(f"max_size must be positive, got {max_size}")
    counts: dict[str, int] = {}
    for seq in token_seqs:
        for tok in getattr(seq, "tokens", seq):
            counts[tok] = counts.get(tok, 0) + 1
    kept = sorted(counts, key=lambda t: (-counts[t], t))[:max_size]
    kept.sort()
    return TokenIndex({tok: N_RESERVED + i for i, tok in enumerate(kept)})


def pad_batch(encoded: Sequence[Sequence[int]], min_len: int = 1) -> tuple:
    """Right-pad id lists to a common length; returns (ids, mask) arrays."""
    width = max(max(len(seq) for seq in encoded), min_len)
    ids = np.full((len(encoded), width), PAD, dtype=np.int64)
    mask = np.zeros((len(encoded), width), dtype=bool)
    for row, seq in enumerate(encoded):
        ids[row, : len(seq)] = seq
        mask[row, : len(seq)] = True
    return ids, mask


@dataclass(frozen=True)
class SequenceModelConfig:
    arch: str
    embedding_dim: int = 100
    hidden: int = 128
    dropout: float = 0.25
    kernel_widths: tuple = (3, 4, 5)
    filters: int = 128
    attention_dim: int = 128
    max_len: int = 128
    freeze_embeddings: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.filters <= 0 or self.hidden <= 0 or self.embedding_dim <= 0:
            raise ValueError("sizes must be positive")
        if not self.kernel_widths or any(w < 1 for w in self.kernel_widths):
            raise ValueError(f"bad kernel widths {self.kernel_widths}")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}")
        object.__setattr__(self, "kernel_widths", tuple(self.kernel_widths))

    def to_dict(self) -> dict:
        return {
            "arch": self.arch, "embedding_dim": self.embedding_dim,
            "hidden": self.hidden, "dropout": self.dropout,
            "kernel_widths": list(self.kernel_widths), "filters": self.filters,
            "attention_dim": self.attention_dim, "max_len": self.max_len,
            "freeze_embeddings": self.freeze_embeddings, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d) -> "SequenceModelConfig":
        d = dict(d)
        d["kernel_widths"] = tuple(d["kernel_widths"])
        return cls(**d)


def embedding_matrix(index: TokenIndex, dim: int, rng: np.random.Generator,
                     table: Optional[EmbeddingTable] = None) -> np.ndarray:
    """Initial embedding rows: zeros for PAD, table vectors where known."""
    out = glorot(rng, (index.size, dim))
    out[PAD] = 0.0
    if table is not None:
        if table.dim != dim:
            raise DataError(f"embedding table dim {table.dim} != configured {dim}")
        for tok, i in index.ids.items():
            vec = table.get(tok)
            if vec is not None:
                out[i] = vec
    return out


class SequenceClassifier(Module):
    """Shared batching and inference for token-sequence classifiers.

    Subclasses provide ``encode_batch`` and ``logits``; ``recurrent`` marks
    models whose gradients should be norm-clipped during training.
    """

    recurrent = False

    def encode_batch(self, token_seqs: Sequence) -> tuple:
        raise NotImplementedError

    def logits(self, ids: np.ndarray, mask: np.ndarray) -> Tensor:
        raise NotImplementedError

    def trainable_parameters(self) -> list:
        return self.parameters()

    def predict_proba(self, token_seqs: Sequence, batch: int = 64) -> np.ndarray:
        """(P(fake), P(real)) rows for every token sequence."""
        self.eval_mode()
        rows = []
        for lo in range(0, len(token_seqs), batch):
            ids, mask = self.encode_batch(token_seqs[lo : lo + batch])
            logits = self.logits(ids, mask).data.astype(np.float64)
            shifted = logits - logits.max(axis=1, keepdims=True)
            e = np.exp(shifted)
            rows.append(e / e.sum(axis=1, keepdims=True))
        return np.concatenate(rows, axis=0)


class SequenceModel(SequenceClassifier):
    """One of the four architectures; see build_model."""

    def __init__(self, config: SequenceModelConfig, index: TokenIndex,
                 table: Optional[EmbeddingTable] = None):
        rng = np.random.default_rng(config.seed)
        self.config = config
        self.index = index
        self.rng = rng
        self.embedding = Embedding(index.size, config.embedding_dim, rng)
        self.embedding.W.data = embedding_matrix(index, config.embedding_dim, rng, table)
        self.drop = Dropout(config.dropout, rng)
        h, d = config.hidden, config.embedding_dim
        if config.arch == "lstm":
            self.rnn1 = LSTM(d, h, rng)
            self.rnn2 = LSTM(h, h, rng)
            head_in = h
        elif config.arch == "bilstm_attn":
            self.rnn = BiLSTM(d, h, rng)
            self.attn = AdditiveAttention(2 * h, config.attention_dim, rng)
            head_in = 2 * h
        elif config.arch == "cnn":
            self.convs = [Conv1D(d, w, config.filters, rng) for w in config.kernel_widths]
            head_in = config.filters * len(config.kernel_widths)
        else:  # cnn_bilstm
            self.conv = Conv1D(d, config.kernel_widths[0], config.filters, rng)
            self.rnn = BiLSTM(config.filters, h, rng)
            head_in = 2 * h
        self.head = Linear(head_in, len(CLASS_ORDER), rng)

    @property
    def recurrent(self) -> bool:
        return self.config.arch != "cnn"

    def min_batch_len(self) -> int:
        if self.config.arch == "cnn":
            return max(self.config.kernel_widths)
        if self.config.arch == "cnn_bilstm":
            return self.config.kernel_widths[0]
        return 1

    def encode_batch(self, token_seqs: Sequence) -> tuple:
        return pad_batch(
            [self.index.encode(getattr(s, "tokens", s), self.config.max_len)
             for s in token_seqs],
            min_len=self.min_batch_len(),
        )

    def trainable_parameters(self) -> list:
        skip = {id(self.embedding.W)} if self.config.freeze_embeddings else set()
        return [p for p in self.parameters() if id(p) not in skip]

    def logits(self, ids: np.ndarray, mask: np.ndarray) -> Tensor:
        config = self.config
        x = self.drop(self.embedding(ids))
        lengths = mask.sum(axis=1)
        if config.arch == "lstm":
            out1, _ = self.rnn1(x, mask)
            out2, last = self.rnn2(self.drop(out1), mask)
            pooled = last
        elif config.arch == "bilstm_attn":
            states, _ = self.rnn(x, mask)
            pooled, _ = self.attn(states, mask)
        elif config.arch == "cnn":
            pieces = []
            for conv, w in zip(self.convs, config.kernel_widths):
                windows = ids.shape[1] - w + 1
                valid = np.arange(windows)[None, :] < np.maximum(lengths - w + 1, 1)[:, None]
                pieces.append(max_over_time(conv(x).relu(), valid, fill=-1.0))
            pooled = concat(pieces, axis=1)
        else:  # cnn_bilstm
            w = config.kernel_widths[0]
            windows = ids.shape[1] - w + 1
            valid = np.arange(windows)[None, :] < np.maximum(lengths - w + 1, 1)[:, None]
            states, _ = self.rnn(self.conv(x).relu(), valid)
            pooled = max_over_time(states, valid, fill=-2.0)
        return self.head(self.drop(pooled))


def build_model(config: SequenceModelConfig, index: TokenIndex,
                embeddings: Optional[EmbeddingTable] = None) -> SequenceModel:
    return SequenceModel(config, index, embeddings)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_f1: float


def history_rows(history: Sequence[EpochRecord]) -> str:
    lines = ["epoch\ttrain_loss\tvalid_f1"]
    for rec in history:
        lines.append(f"{rec.epoch}\t{rec.train_loss:.6f}\t{rec.valid_f1:.6f}")
    return "\n".join(lines) + "\n"


def _labeled_batches(model, data, order, batch):
    for lo in range(0, len(order), batch):
        idx = order[lo : lo + batch]
        ids, mask = model.encode_batch([data[i][0] for i in idx])
        targets = np.array([_CLASS_INDEX[data[i][1]] for i in idx])
        yield ids, mask, targets


def train_sequence_model(model: SequenceClassifier, train_data: Sequence[tuple],
                         valid_data: Optional[Sequence[tuple]] = None,
                         epochs: int = 10, batch: int = 32, lr: float = 1e-3,
                         seed: int = 0, patience: int = 3,
                         clip_norm: float = 5.0) -> list[EpochRecord]:
    """Adam training with early stopping on validation weighted F1.

    Recurrent architectures clip gradients to a global norm of ``clip_norm``.
    Without a validation set the stopping metric is training-set F1. The
    model is left at the best-scoring epoch's parameters.
    """
    from .ensemble import evaluate  # local import, no module cycle

    if not train_data:
        raise DataError("training data is empty")
    present = {label for _, label in train_data}
    if set(CLASS_ORDER) - present:
        raise DataError("training data must contain both classes")
    rng = np.random.default_rng(seed)
    order = np.arange(len(train_data))
    params = model.trainable_parameters()
    monitor = valid_data if valid_data is not None else train_data
    history: list[EpochRecord] = []
    best_f1 = -1.0
    best_state = None
    since_best = 0
    for epoch in range(1, epochs + 1):
        model.train_mode()
        rng.shuffle(order)
        total, steps = 0.0, 0
        for ids, mask, targets in _labeled_batches(model, train_data, order, batch):
            loss, _ = softmax_cross_entropy(model.logits(ids, mask), targets)
            zero_grads(params)
            loss.backward()
            if model.recurrent:
                clip_global_norm(params, clip_norm)
            adam_step(params, lr)
            total += loss.item()
            steps += 1
        probs = model.predict_proba([seq for seq, _ in monitor])
        preds = [CLASS_ORDER[i] for i in probs.argmax(axis=1)]
        f1 = evaluate(preds, [label for _, label in monitor]).weighted_f1
        history.append(EpochRecord(epoch, total / max(steps, 1), f1))
        if f1 > best_f1:
            best_f1 = f1
            best_state = [p.data.copy() for p in model.parameters()]
            since_best = 0
        else:
            since_best += 1
            if since_best >= patience:
                break
    if best_state is not None:
        for p, data in zip(model.parameters(), best_state):
            p.data = data
    model.eval_mode()
    return history

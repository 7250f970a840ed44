"""Small transformer-encoder classifiers in three flavors.

``standard`` is a plain post-norm encoder with learned absolute position
embeddings. ``shared_layers`` reuses one block's parameters at every depth.
``relative_position`` drops absolute positions and instead adds a learned
per-head bias b[clip(i - j)] to the attention logits, so attention depends
only on token offsets. A reserved class-marker token is prepended and its
final representation feeds the softmax head.

Models train from random initialization; defaults are sized for CPU runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import CLASS_ORDER
from .nn import Dropout, Embedding, EncoderBlock, Linear, Parameter, Tensor, glorot, take
from .sequence_models import (EpochRecord, SequenceClassifier, TokenIndex,
                              pad_batch, train_sequence_model)

VARIANTS = ("standard", "shared_layers", "relative_position")

# batch sizes for the fidelity configuration, per variant
DEFAULT_BATCH = {"standard": 16, "shared_layers": 32, "relative_position": 16}


@dataclass(frozen=True)
class EncoderConfig:
    variant: str = "standard"
    layers: int = 2
    heads: int = 4
    d_model: int = 64
    d_ffn: int = 256
    max_len: int = 128
    dropout: float = 0.1
    clip_distance: int = 8
    vocab_size: int = 0  # 0 = take from the token index at build time
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.d_model % self.heads:
            raise ValueError(f"{self.heads} heads do not divide d_model={self.d_model}")
        if self.max_len < 2:
            raise ValueError("max_len must fit the class marker plus one token")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.clip_distance < 1:
            raise ValueError(f"clip_distance must be >= 1, got {self.clip_distance}")

    def to_dict(self) -> dict:
        return {
            "variant": self.variant, "layers": self.layers, "heads": self.heads,
            "d_model": self.d_model, "d_ffn": self.d_ffn, "max_len": self.max_len,
            "dropout": self.dropout, "clip_distance": self.clip_distance,
            "vocab_size": self.vocab_size, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d) -> "EncoderConfig":
        return cls(**d)


class EncoderModel(SequenceClassifier):
    """Token + position representation, L encoder blocks, class-token head."""

    def __init__(self, config: EncoderConfig, index: TokenIndex):
        if config.vocab_size and config.vocab_size != index.size:
            raise ValueError(
                f"config vocab_size {config.vocab_size} != token index size {index.size}")
        rng = np.random.default_rng(config.seed)
        self.config = config
        self.index = index
        self.rng = rng
        relative = config.variant == "relative_position"
        self.embedding = Embedding(index.size, config.d_model, rng)
        self.positions = (
            None if relative
            else Parameter(glorot(rng, (config.max_len, config.d_model)))
        )
        if config.variant == "shared_layers":
            block = self._make_block(rng, relative)
            self.blocks = [block] * config.layers
        else:
            self.blocks = [self._make_block(rng, relative) for _ in range(config.layers)]
        self.drop = Dropout(config.dropout, rng)
        self.head = Linear(config.d_model, len(CLASS_ORDER), rng)

    def _make_block(self, rng, relative: bool) -> EncoderBlock:
        c = self.config
        return EncoderBlock(c.d_model, c.heads, c.d_ffn, c.dropout, rng,
                            relative=relative, clip_distance=c.clip_distance)

    def encode_batch(self, token_seqs: Sequence) -> tuple:
        return pad_batch(
            [self.index.encode(getattr(s, "tokens", s), self.config.max_len, add_cls=True)
             for s in token_seqs],
            min_len=2,
        )

    def forward_ids(self, ids: np.ndarray, mask: np.ndarray,
                    return_attention: bool = False):
        """Logits over (fake, real); optionally per-layer attention arrays."""
        steps = ids.shape[1]
        if steps > self.config.max_len:
            raise ValueError(f"sequence length {steps} exceeds max_len {self.config.max_len}")
        x = self.embedding(ids)
        if self.positions is not None:
            x = x + self.positions[np.arange(steps)]
        x = self.drop(x)
        attentions = []
        for block in self.blocks:
            x, weights = block(x, mask)
            attentions.append(weights)
        logits = self.head(self.drop(x[:, 0, :]))
        return (logits, attentions) if return_attention else logits

    def logits(self, ids: np.ndarray, mask: np.ndarray) -> Tensor:
        return self.forward_ids(ids, mask)


def build_encoder(config: EncoderConfig, index: TokenIndex) -> EncoderModel:
    return EncoderModel(config, index)


def encode_classify(model: EncoderModel, tokens, return_attention: bool = False):
    """Probability vector for one token sequence."""
    ids, mask = model.encode_batch([tokens])
    model.eval_mode()
    if return_attention:
        logits, attentions = model.forward_ids(ids, mask, return_attention=True)
        data = logits.data.astype(np.float64)[0]
    else:
        data = model.forward_ids(ids, mask).data.astype(np.float64)[0]
    e = np.exp(data - data.max())
    probs = e / e.sum()
    return (probs, attentions) if return_attention else probs


def train_encoder(model: EncoderModel, train_data: Sequence[tuple],
                  valid_data: Optional[Sequence[tuple]] = None,
                  epochs: int = 10, batch: Optional[int] = None, lr: float = 3e-4,
                  seed: int = 0, patience: int = 3) -> list[EpochRecord]:
    """Adam + early stopping; batch defaults to the variant's standard size."""
    if batch is None:
        batch = DEFAULT_BATCH[model.config.variant]
    return train_sequence_model(model, train_data, valid_data, epochs=epochs,
                                batch=batch, lr=lr, seed=seed, patience=patience)

"""Sparse TF-IDF features and dense embedding features.

Vocabularies cap at the most document-frequent features; TF-IDF weights use
smoothed inverse document frequency, ``ln((1 + n_docs) / (1 + df)) + 1``, and
every document vector is L2-normalized.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import DataError

log = logging.getLogger(__name__)

_ANALYZERS = ("word", "char")


@dataclass(frozen=True)
class VectorizerConfig:
    analyzer: str = "word"
    ngram_min: int = 1
    ngram_max: int = 1
    max_features: int = 100_000

    def __post_init__(self):
        if self.analyzer not in _ANALYZERS:
            raise ValueError(f"unknown analyzer {self.analyzer!r}")
        if self.ngram_min < 1 or self.ngram_min > self.ngram_max:
            raise ValueError(f"bad n-gram range [{self.ngram_min}, {self.ngram_max}]")
        if self.max_features <= 0:
            raise ValueError(f"max_features must be positive, got {self.max_features}")

    def to_dict(self) -> dict:
        return {
            "analyzer": self.analyzer,
            "ngram_min": self.ngram_min,
            "ngram_max": self.ngram_max,
            "max_features": self.max_features,
        }

    @classmethod
    def from_dict(cls, d) -> "VectorizerConfig":
        return cls(d["analyzer"], int(d["ngram_min"]), int(d["ngram_max"]), int(d["max_features"]))


def _token_list(doc) -> Sequence[str]:
    return doc.tokens if hasattr(doc, "tokens") else doc


def _doc_features(doc, config: VectorizerConfig) -> list[str]:
    """All analyzer features of one document (with repetition)."""
    tokens = _token_list(doc)
    feats: list[str] = []
    if config.analyzer == "word":
        for n in range(config.ngram_min, config.ngram_max + 1):
            for i in range(len(tokens) - n + 1):
                feats.append(" ".join(tokens[i : i + n]))
    else:  # char n-grams within token boundaries
        for tok in tokens:
            for n in range(config.ngram_min, config.ngram_max + 1):
                for i in range(len(tok) - n + 1):
                    feats.append(tok[i : i + n])
    return feats


@dataclass(frozen=True)
class Vocabulary:
    """Feature index with document frequencies, capped at ``max_features``."""

    config: VectorizerConfig
    index: dict  # feature -> column
    doc_freq: dict  # feature -> number of documents containing it
    total_documents: int

    @property
    def size(self) -> int:
        return len(self.index)

    def idf(self, feature: str) -> float:
        df = self.doc_freq[feature]
        return math.log((1 + self.total_documents) / (1 + df)) + 1.0

    def to_dict(self) -> dict:
        ordered = sorted(self.index, key=self.index.get)
        return {
            "config": self.config.to_dict(),
            "total_documents": self.total_documents,
            "features": [[feat, self.doc_freq[feat]] for feat in ordered],
        }

    @classmethod
    def from_dict(cls, d) -> "Vocabulary":
        config = VectorizerConfig.from_dict(d["config"])
        index = {feat: i for i, (feat, _) in enumerate(d["features"])}
        doc_freq = {feat: int(df) for feat, df in d["features"]}
        return cls(config, index, doc_freq, int(d["total_documents"]))


def build_vocabulary(docs: Sequence, config: VectorizerConfig) -> Vocabulary:
    """Enumerate features over a corpus and keep the most document-frequent.

    Ties between equally frequent features break lexicographically; indices
    are assigned in lexicographic order of the kept features, so the result
    is deterministic for a given corpus and config.
    """
    if len(docs) == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df: dict[str, int] = {}
    for doc in docs:
        for feat in set(_doc_features(doc, config)):
            df[feat] = df.get(feat, 0) + 1
    if not df:
        raise ValueError("corpus produced no features")
    if len(df) > config.max_features:
        kept = sorted(df, key=lambda f: (-df[f], f))[: config.max_features]
    else:
        kept = list(df)
    kept.sort()
    index = {feat: i for i, feat in enumerate(kept)}
    doc_freq = {feat: df[feat] for feat in kept}
    return Vocabulary(config, index, doc_freq, len(docs))


@dataclass(frozen=True)
class SparseVector:
    """Sorted (index, weight) pairs over a fixed dimension."""

    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64
    dimension: int

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2)))

    def dot_dense(self, w: np.ndarray) -> float:
        return float(w[self.indices] @ self.values)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dimension)
        out[self.indices] = self.values
        return out


def tfidf_vector(doc, vocab: Vocabulary) -> SparseVector:
    """L2-normalized TF-IDF vector of one document; unknown features ignored."""
    counts: dict[int, int] = {}
    feats: dict[int, str] = {}
    for feat in _doc_features(doc, vocab.config):
        col = vocab.index.get(feat)
        if col is None:
            continue
        counts[col] = counts.get(col, 0) + 1
        feats[col] = feat
    if not counts:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0), vocab.size)
    cols = np.array(sorted(counts), dtype=np.int64)
    vals = np.array([counts[c] * vocab.idf(feats[c]) for c in cols])
    norm = np.sqrt(np.sum(vals**2))
    if norm > 0:
        vals = vals / norm
    return SparseVector(cols, vals, vocab.size)


def concat_sparse(parts: Sequence[SparseVector]) -> SparseVector:
    """Stack per-vocabulary vectors into one feature-union vector."""
    indices = []
    values = []
    offset = 0
    for part in parts:
        indices.append(part.indices + offset)
        values.append(part.values)
        offset += part.dimension
    return SparseVector(
        np.concatenate(indices) if indices else np.empty(0, dtype=np.int64),
        np.concatenate(values) if values else np.empty(0),
        offset,
    )


def tfidf_union_vector(doc, vocabs: Sequence[Vocabulary]) -> SparseVector:
    return concat_sparse([tfidf_vector(doc, v) for v in vocabs])


def tfidf_matrix(docs: Sequence, vocabs: Sequence[Vocabulary]) -> sparse.csr_matrix:
    """CSR matrix of feature-union TF-IDF rows, one per document."""
    dim = sum(v.size for v in vocabs)
    data: list[np.ndarray] = []
    indices: list[np.ndarray] = []
    indptr = [0]
    for doc in docs:
        vec = tfidf_union_vector(doc, vocabs)
        data.append(vec.values)
        indices.append(vec.indices)
        indptr.append(indptr[-1] + len(vec.indices))
    return sparse.csr_matrix(
        (
            np.concatenate(data) if data else np.empty(0),
            np.concatenate(indices) if indices else np.empty(0, dtype=np.int64),
            np.array(indptr, dtype=np.int64),
        ),
        shape=(len(docs), dim),
    )


@dataclass(frozen=True)
class EmbeddingTable:
    """Token -> dense vector map of fixed dimension."""

    vectors: dict
    dim: int

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError(f"embedding dimension must be positive, got {self.dim}")
        for token, vec in self.vectors.items():
            if len(vec) != self.dim:
                raise ValueError(
                    f"embedding for {token!r} has length {len(vec)}, expected {self.dim}")

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, token: str) -> Optional[np.ndarray]:
        return self.vectors.get(token)

    def scale(self, c: float) -> "EmbeddingTable":
        return EmbeddingTable({t: v * c for t, v in self.vectors.items()}, self.dim)


def load_embeddings(path: str | Path, expected_dim: Optional[int] = None,
                    dtype=np.float32) -> EmbeddingTable:
    """Parse a whitespace-separated text embedding file (token then d floats).

    Duplicate tokens keep the first occurrence with a warning; inconsistent
    dimensions or non-numeric components raise with the offending line number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"embedding file not found: {path}")
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, comps = parts[0], parts[1:]
            if not comps:
                raise DataError(f"{path}:{lineno}: no vector components")
            try:
                vec = np.array([float(c) for c in comps], dtype=dtype)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric component") from exc
            if dim is None:
                dim = len(vec)
                if expected_dim is not None and dim != expected_dim:
                    raise DataError(
                        f"{path}:{lineno}: dimension {dim} != expected {expected_dim}"
                    )
            elif len(vec) != dim:
                raise DataError(f"{path}:{lineno}: dimension {len(vec)} != {dim}")
            if token in vectors:
                log.warning("duplicate embedding token %r at %s:%d; keeping first", token, path, lineno)
                continue
            vectors[token] = vec
    if dim is None:
        if expected_dim is None:
            raise DataError(f"{path}: empty embedding file and no expected dimension given")
        dim = expected_dim
    return EmbeddingTable(vectors, dim)


def average_embeddings(tokens: Sequence[str], weights: Sequence[float],
                       table: EmbeddingTable, total: Optional[int] = None) -> np.ndarray:
    """Sum of ``weights[i] * embedding(tokens[i])`` divided by the token count.

    ``total`` defaults to ``len(tokens)``; tokens missing from the table
    contribute the zero vector but still count toward the divisor.
    """
    if len(tokens) != len(weights):
        raise ValueError(f"{len(tokens)} tokens but {len(weights)} weights")
    out = np.zeros(table.dim)
    for tok, w in zip(tokens, weights):
        emb = table.get(tok)
        if emb is not None:
            out += w * np.asarray(emb, dtype=np.float64)
    denom = len(tokens) if total is None else total
    if denom <= 0:
        return np.zeros(table.dim)
    return out / denom


def weighted_average_embedding(doc, vocab: Vocabulary, table: EmbeddingTable,
                               average_over_known: bool = False) -> np.ndarray:
    """TF-IDF weighted average of token embeddings.

    Each token position contributes ``tfidf(token) * embedding(token)`` with
    the weight read from the document's L2-normalized TF-IDF vector; the sum
    divides by the total token count (tokens missing from the table or the
    vocabulary contribute zero but still count, unless ``average_over_known``).
    """
    if vocab.config.analyzer != "word" or vocab.config.ngram_max != 1:
        raise ValueError("weighted averaging needs a word-level unigram vocabulary")
    tokens = _token_list(doc)
    if len(tokens) == 0:
        return np.zeros(table.dim)
    vec = tfidf_vector(doc, vocab)
    weight_by_col = dict(zip(vec.indices.tolist(), vec.values.tolist()))
    weights = [weight_by_col.get(vocab.index.get(tok), 0.0) if tok in vocab.index else 0.0
               for tok in tokens]
    if average_over_known:
        total = sum(1 for tok in tokens if tok in vocab.index and tok in table)
    else:
        total = len(tokens)
    return average_embeddings(tokens, weights, table, total=total)

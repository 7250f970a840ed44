"""Loading, validating and summarizing labeled social-media datasets.

Datasets are UTF-8 TSV files with a header row.  Labeled files carry three
columns (``id``, ``tweet``, ``label``) with labels ``real``/``fake`` parsed
case-insensitively; unlabeled prediction inputs omit the label column.
"""

from __future__ import annotations

import importlib.resources
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DataError

REAL = "real"
FAKE = "fake"
LABELS = (REAL, FAKE)

# order of probability vectors everywhere: (P(fake), P(real))
CLASS_ORDER = (FAKE, REAL)

SPLITS = ("train", "valid", "test", "unlabeled")

_LABELED_HEADER = ("id", "tweet", "label")
_UNLABELED_HEADER = ("id", "tweet")


@dataclass(frozen=True)
class LabeledRecord:
    """One social-media post, optionally carrying a gold label."""

    id: str
    text: str
    label: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise DataError("record id must be non-empty")
        if not self.text:
            raise DataError(f"record {self.id!r}: text must be non-empty")
        if self.label is not None and self.label not in LABELS:
            raise DataError(f"record {self.id!r}: unknown label {self.label!r}")


@dataclass(frozen=True)
class Corpus:
    """Immutable ordered collection of records belonging to one split."""

    records: tuple[LabeledRecord, ...]
    split: str = "train"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise DataError(f"unknown split {self.split!r}")
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise DataError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[LabeledRecord]:
        return iter(self.records)

    @property
    def labeled(self) -> bool:
        return all(rec.label is not None for rec in self.records)

    def labels(self) -> list[str]:
        if not self.labeled:
            raise DataError("corpus is not fully labeled")
        return [rec.label for rec in self.records]  # type: ignore[misc]


def load_dataset(path: str | Path, expect_labels: bool = True, split: Optional[str] = None) -> Corpus:
    """Read a dataset TSV into a Corpus.

    The header decides the column layout.  ``expect_labels=True`` rejects
    unlabeled files; with ``expect_labels=False`` either layout is accepted
    and labels are kept when present.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty file (expected a header row)")

    header = tuple(col.strip().lower() for col in lines[0].split("\t"))
    if header == _LABELED_HEADER:
        labeled_file = True
    elif header == _UNLABELED_HEADER:
        labeled_file = False
    else:
        raise DataError(f"{path}: unrecognized header {lines[0]!r}")
    if expect_labels and not labeled_file:
        raise DataError(f"{path}: labels expected but header has no label column")

    ncols = 3 if labeled_file else 2
    records = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        cols = line.split("\t")
        if len(cols) != ncols:
            raise DataError(f"{path}:{lineno}: expected {ncols} columns, found {len(cols)}")
        rec_id = cols[0].strip()
        text = cols[1]
        label = None
        if labeled_file:
            raw = cols[2].strip().lower()
            if raw not in LABELS:
                raise DataError(f"{path}:{lineno}: unknown label {cols[2]!r}")
            label = raw
        if rec_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate id {rec_id!r}")
        seen.add(rec_id)
        if not rec_id:
            raise DataError(f"{path}:{lineno}: empty id")
        if not text:
            raise DataError(f"{path}:{lineno}: empty text")
        records.append(LabeledRecord(rec_id, text, label))

    if split is None:
        split = "train" if labeled_file else "unlabeled"
    return Corpus(tuple(records), split=split)


def save_dataset(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to TSV in the canonical column layout."""
    labeled = corpus.labeled and corpus.split != "unlabeled"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(_LABELED_HEADER if labeled else _UNLABELED_HEADER) + "\n")
        for rec in corpus:
            if labeled:
                fh.write(f"{rec.id}\t{rec.text}\t{rec.label}\n")
            else:
                fh.write(f"{rec.id}\t{rec.text}\n")


def class_stats(corpus: Corpus) -> dict[str, int]:
    """Label -> count over a fully labeled corpus."""
    if not corpus.labeled:
        raise DataError("class_stats requires a fully labeled corpus")
    counts = Counter(rec.label for rec in corpus)
    return {label: counts.get(label, 0) for label in LABELS}


def frequent_terms(
    token_seqs: Sequence,
    labels: Sequence[str],
    label: str,
    k: int,
    stopwords: Iterable[str] = (),
) -> list[tuple[str, int]]:
    """Top-k tokens by total frequency among documents with the given label.

    ``token_seqs`` are preprocessed token sequences aligned with ``labels``.
    Stopwords are excluded; ties break lexicographically.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if label not in LABELS:
        raise DataError(f"unknown label {label!r}")
    if len(token_seqs) != len(labels):
        raise DataError("token sequences and labels are misaligned")
    stop = set(stopwords)
    counts: Counter[str] = Counter()
    for seq, lab in zip(token_seqs, labels):
        if lab != label:
            continue
        tokens = seq.tokens if hasattr(seq, "tokens") else seq
        counts.update(tok for tok in tokens if tok not in stop)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def load_stopwords(path: Optional[str | Path] = None) -> frozenset[str]:
    """Stopword set from a one-token-per-line file; ships a default English list."""
    if path is None:
        text = importlib.resources.files("misinfo.resources").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise DataError(f"stopword file not found: {p}")
        text = p.read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)

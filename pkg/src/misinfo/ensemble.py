"""Probability averaging across models, metrics, and error reporting.

Metrics are computed with exact rational arithmetic and converted to float
once at the end, so algebraic identities (weighted recall equals accuracy
on any two-class problem) survive the float conversion bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import CLASS_ORDER, Corpus, FAKE
from .errors import DataError

_INDEX = {label: i for i, label in enumerate(CLASS_ORDER)}


def check_prob_vector(p: np.ndarray, atol: float = 1e-9) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (len(CLASS_ORDER),):
        raise ValueError(f"probability vector must have shape (2,), got {p.shape}")
    if (p < -atol).any() or (p > 1 + atol).any() or abs(float(p.sum()) - 1.0) > atol:
        raise ValueError(f"not a probability vector: {p}")
    return p


def average_probs(rows: Sequence[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of probability vectors.

    Components are summed exactly (fsum) before the single division, so the
    result is bit-identical under any member permutation.
    """
    if len(rows) == 0:
        raise ValueError("cannot average zero probability vectors")
    stacked = np.stack([check_prob_vector(r) for r in rows])
    return np.array([math.fsum(stacked[:, j]) for j in range(stacked.shape[1])]) / len(rows)


def predicted_label(p: np.ndarray, tie: str = FAKE) -> str:
    """Argmax class; an exact tie resolves to ``tie`` (default fake)."""
    if p[0] == p[1]:
        return tie
    return CLASS_ORDER[int(np.argmax(p))]


def ensemble_predict(members: Sequence[Callable], x, tie: str = FAKE) -> tuple:
    """Mean of member probability outputs on one input; returns (probs, label)."""
    if len(members) == 0:
        raise ValueError("ensemble needs at least one member")
    probs = average_probs([member(x) for member in members])
    return probs, predicted_label(probs, tie)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class: dict  # label -> ClassMetrics
    confusion: np.ndarray  # [gold_index][pred_index], CLASS_ORDER order
    count: int

    def row(self) -> str:
        """Tab row in report column order: precision, recall, accuracy, f1."""
        return (f"{self.weighted_precision:.6f}\t{self.weighted_recall:.6f}"
                f"\t{self.accuracy:.6f}\t{self.weighted_f1:.6f}")


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def evaluate(preds: Sequence[str], golds: Sequence[str]) -> Metrics:
    """Confusion-matrix metrics; zero-denominator scores are defined as 0."""
    if len(preds) != len(golds):
        raise DataError(f"{len(preds)} predictions vs {len(golds)} gold labels")
    if not golds:
        raise DataError("cannot evaluate an empty label list")
    confusion = np.zeros((2, 2), dtype=np.int64)
    for pred, gold in zip(preds, golds):
        if pred not in _INDEX:
            raise DataError(f"unknown predicted label {pred!r}")
        if gold not in _INDEX:
            raise DataError(f"unknown gold label {gold!r}")
        confusion[_INDEX[gold], _INDEX[pred]] += 1
    n = len(golds)
    per_class = {}
    weighted = {"precision": Fraction(0), "recall": Fraction(0), "f1": Fraction(0)}
    macro = {"precision": Fraction(0), "recall": Fraction(0), "f1": Fraction(0)}
    for label, i in _INDEX.items():
        tp = int(confusion[i, i])
        fp = int(confusion[1 - i, i])
        fn = int(confusion[i, 1 - i])
        support = tp + fn
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, support)
        f1 = _ratio(2 * tp, 2 * tp + fp + fn)
        per_class[label] = ClassMetrics(float(precision), float(recall), float(f1), support)
        for key, value in (("precision", precision), ("recall", recall), ("f1", f1)):
            weighted[key] += value * Fraction(support, n)
            macro[key] += value / len(_INDEX)
    accuracy = Fraction(int(confusion[0, 0] + confusion[1, 1]), n)
    return Metrics(
        accuracy=float(accuracy),
        weighted_precision=float(weighted["precision"]),
        weighted_recall=float(weighted["recall"]),
        weighted_f1=float(weighted["f1"]),
        macro_precision=float(macro["precision"]),
        macro_recall=float(macro["recall"]),
        macro_f1=float(macro["f1"]),
        per_class=per_class,
        confusion=confusion,
        count=n,
    )


def format_metrics_table(rows: Mapping[str, Metrics]) -> str:
    """One TSV row per model: precision, recall, accuracy, F1 (weighted)."""
    lines = ["model\tprecision\trecall\taccuracy\tf1"]
    for name, metrics in rows.items():
        lines.append(f"{name}\t{metrics.row()}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReportRow:
    id: str
    text: str
    gold: str
    verdicts: dict  # model name -> predicted label


def misclassification_report(corpus: Corpus,
                             preds_by_model: Mapping[str, Sequence[str]]) -> list[ReportRow]:
    """Rows for every sample at least one model misclassified."""
    if not corpus.labeled:
        raise DataError("misclassification report needs gold labels")
    for name, preds in preds_by_model.items():
        if len(preds) != len(corpus.records):
            raise DataError(
                f"model {name!r}: {len(preds)} predictions for "
                f"{len(corpus.records)} records")
    rows = []
    for i, rec in enumerate(corpus.records):
        verdicts = {name: preds[i] for name, preds in preds_by_model.items()}
        if any(pred != rec.label for pred in verdicts.values()):
            rows.append(ReportRow(rec.id, rec.text, rec.label, verdicts))
    return rows


def format_report(rows: Sequence[ReportRow], model_names: Sequence[str]) -> str:
    """TSV: id, text, gold, then a check or cross per model."""
    lines = ["id\ttext\tgold\t" + "\t".join(model_names)]
    for row in rows:
        marks = ["✓" if row.verdicts[name] == row.gold else "✗"
                 for name in model_names]
        lines.append(f"{row.id}\t{row.text}\t{row.gold}\t" + "\t".join(marks))
    return "\n".join(lines) + "\n"

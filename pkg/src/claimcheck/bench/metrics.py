"""Evaluation metrics: accuracy, micro-F1, confusion, pairwise accuracies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import LengthMismatch, UnknownLabel


def _check_lengths(preds, golds):
    if len(preds) != len(golds):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(golds)} golds")
    if not preds:
        raise LengthMismatch("empty prediction list")


def accuracy(preds: list[str], golds: list[str]) -> float:
    _check_lengths(preds, golds)
    return sum(p == g for p, g in zip(preds, golds)) / len(preds)


def micro_f1(preds: list[str], golds: list[str]) -> float:
    """Micro-averaged F1 from pooled per-class TP/FP/FN counts."""
    _check_lengths(preds, golds)
    classes = set(preds) | set(golds)
    tp = fp = fn = 0
    for c in classes:
        tp += sum(p == c and g == c for p, g in zip(preds, golds))
        fp += sum(p == c and g != c for p, g in zip(preds, golds))
        fn += sum(p != c and g == c for p, g in zip(preds, golds))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def confusion_matrix(preds: list[str], golds: list[str], labels: list[str]) -> np.ndarray:
    """Counts indexed [gold, pred] by position in ``labels``."""
    _check_lengths(preds, golds)
    index = {label: i for i, label in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=int)
    for p, g in zip(preds, golds):
        if p not in index:
            raise UnknownLabel(p)
        if g not in index:
            raise UnknownLabel(g)
        matrix[index[g], index[p]] += 1
    return matrix


_VERITE_SET = {"true", "ooc", "miscaptioned"}


def verite_pairwise(preds: list[str], golds: list[str]) -> tuple[float, float, float]:
    """(true-vs-ooc, true-vs-miscaptioned, true-vs-false) accuracies.

    Restricted pairs binarize predictions: anything that is not ``true``
    counts on the negative side. The merged setup folds ooc and miscaptioned
    into ``false`` on both sides.
    """
    _check_lengths(preds, golds)
    for value in list(preds) + list(golds):
        if value not in _VERITE_SET:
            raise UnknownLabel(value)

    def restricted(negative: str) -> float:
        pairs = [(p, g) for p, g in zip(preds, golds) if g in ("true", negative)]
        if not pairs:
            raise LengthMismatch(f"no gold instances for true-vs-{negative}")
        correct = sum(
            (("true" if p == "true" else negative) == g) for p, g in pairs
        )
        return correct / len(pairs)

    t_ooc = restricted("ooc")
    t_mc = restricted("miscaptioned")

    def fold(x: str) -> str:
        return "true" if x == "true" else "false"

    t_f = sum(fold(p) == fold(g) for p, g in zip(preds, golds)) / len(preds)
    return t_ooc, t_mc, t_f


@dataclass
class MetricsReport:
    """Aggregated sweep results; confusion covers the last run."""

    n: int
    labels: list[str]
    per_run: list[float]
    mean: float
    std: float
    confusion: list[list[int]]
    n_failed: int = 0
    failures: list[dict] = field(default_factory=list)
    verite_pairwise: tuple[float, float, float] | None = None
    config_digest: str = ""

    @property
    def accuracy(self) -> float:
        return self.per_run[-1] if self.per_run else 0.0

    def to_dict(self) -> dict:
        data = {
            "n": self.n,
            "labels": self.labels,
            "per_run_accuracy": self.per_run,
            "mean_accuracy": self.mean,
            "std_accuracy": self.std,
            "accuracy": self.accuracy,
            "confusion": self.confusion,
            "n_failed": self.n_failed,
            "failures": self.failures,
            "config_digest": self.config_digest,
        }
        if self.verite_pairwise is not None:
            t_ooc, t_mc, t_f = self.verite_pairwise
            data["verite_pairwise"] = {"t_ooc": t_ooc, "t_mc": t_mc, "t_f": t_f}
        return data

"""Confusion matrices and per-class / macro classification metrics.

Rows of a confusion matrix are actual classes, columns are predictions.
G-mean is the geometric mean of precision and recall, ``sqrt(P * R)``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DimensionError, EmptyDatasetError


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self) -> None:
        c = np.array(self.counts, dtype=np.int64)
        n = len(self.class_names)
        if c.shape != (n, n):
            raise DimensionError(f"counts of shape {c.shape} for {n} classes")
        if (c < 0).any():
            raise ConfigError("confusion counts must be non-negative")
        c.flags.writeable = False
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.class_names == other.class_names and np.array_equal(self.counts, other.counts)

    __hash__ = None  # type: ignore[assignment]


class OneVsRestCounts(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def accuracy(self) -> float:
        """Binary accuracy of this class against the rest, (TP + TN) / total."""
        return (self.tp + self.tn) / self.total


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f_measure: float
    g_mean: float
    precision_defined: bool = True
    recall_defined: bool = True


@dataclass(frozen=True, eq=False)
class MetricsReport:
    per_class: tuple[ClassMetrics, ...]
    overall_accuracy: float
    error_rate: float
    macro_f: float
    macro_g: float
    confusion: ConfusionMatrix
    normalized_confusion: np.ndarray

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.confusion.class_names


def build_confusion(
    y_true: Sequence[int] | np.ndarray,
    y_pred: Sequence[int] | np.ndarray,
    class_names: Sequence[str],
) -> ConfusionMatrix:
    t = np.asarray(y_true, dtype=np.int64).reshape(-1)
    p = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    n = len(class_names)
    if t.size != p.size:
        raise DimensionError(f"{t.size} true labels but {p.size} predictions")
    for arr, what in ((t, "true"), (p, "predicted")):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ConfigError(f"{what} label outside [0, {n})")
    counts = np.zeros((n, n), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts, tuple(class_names))


def row_normalize(c: ConfusionMatrix) -> np.ndarray:
    counts = c.counts.astype(np.float64)
    sums = counts.sum(axis=1, keepdims=True)
    out = np.zeros_like(counts)
    np.divide(counts, sums, out=out, where=sums > 0)
    return out


def one_vs_rest(c: ConfusionMatrix, i: int) -> OneVsRestCounts:
    if not 0 <= i < c.n_classes:
        raise ConfigError(f"class index {i} outside [0, {c.n_classes})")
    tp = int(c.counts[i, i])
    fp = int(c.counts[:, i].sum()) - tp
    fn = int(c.counts[i, :].sum()) - tp
    return OneVsRestCounts(tp, fp, fn, c.total - tp - fp - fn)


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision == recall:
        # 2PP/(P+P) can round one ulp away from P; sqrt(P*P) never does.
        return float(precision)
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def g_mean(precision: float, recall: float) -> float:
    return math.sqrt(precision * recall)


def per_class_metrics(counts: OneVsRestCounts) -> ClassMetrics:
    tp, fp, fn, _ = counts
    p_def = tp + fp > 0
    r_def = tp + fn > 0
    precision = tp / (tp + fp) if p_def else 0.0
    recall = tp / (tp + fn) if r_def else 0.0
    return ClassMetrics(
        precision=precision,
        recall=recall,
        f_measure=f_measure(precision, recall),
        g_mean=g_mean(precision, recall),
        precision_defined=p_def,
        recall_defined=r_def,
    )


def overall_accuracy(c: ConfusionMatrix) -> tuple[float, float]:
    """Multiclass accuracy (trace over total) and its complement."""
    if c.total == 0:
        raise EmptyDatasetError("accuracy of an empty confusion matrix is undefined")
    acc = float(np.trace(c.counts)) / c.total
    return acc, 1.0 - acc


def macro_average(per_class: Sequence[ClassMetrics]) -> tuple[float, float]:
    """Unweighted means of F-measure and G-mean over classes."""
    if not per_class:
        raise EmptyDatasetError("no classes to average")
    n = len(per_class)
    return (
        math.fsum(m.f_measure for m in per_class) / n,
        math.fsum(m.g_mean for m in per_class) / n,
    )


def aggregate_report(c: ConfusionMatrix) -> MetricsReport:
    acc, err = overall_accuracy(c)
    per_class = tuple(per_class_metrics(one_vs_rest(c, i)) for i in range(c.n_classes))
    macro_f, macro_g = macro_average(per_class)
    norm = row_normalize(c)
    norm.flags.writeable = False
    return MetricsReport(
        per_class=per_class,
        overall_accuracy=acc,
        error_rate=err,
        macro_f=macro_f,
        macro_g=macro_g,
        confusion=c,
        normalized_confusion=norm,
    )

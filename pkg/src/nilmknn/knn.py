"""Exact k-nearest-neighbors classification by exhaustive scan.

Neighbor order is ascending distance with ties broken by ascending
training index. A vote tie between classes goes to the tied class that owns
the nearest neighbor.
"""

from __future__ import annotations

import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataWarning, DimensionError, EmptyDatasetError
from .preprocess import LabeledDataset

DEFAULT_K = 5


class Neighbor(NamedTuple):
    index: int
    distance: float


@dataclass(frozen=True, eq=False)
class KnnModel:
    points: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64).reshape(-1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise EmptyDatasetError("a model needs at least one training point")
        if pts.shape[0] != y.size:
            raise DimensionError(f"{pts.shape[0]} points but {y.size} labels")
        if self.n_classes < 1 or y.min() < 0 or y.max() >= self.n_classes:
            raise ConfigError("labels must lie in [0, n_classes)")
        pts.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", y)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])


def fit(dataset: LabeledDataset) -> KnnModel:
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot fit on an empty dataset")
    return KnnModel(dataset.windows, dataset.labels, dataset.n_classes)


def euclidean_distance(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.dot(d, d)))


def _check_query(model: KnnModel, x: Sequence[float] | np.ndarray, k: int) -> np.ndarray:
    q = np.asarray(x, dtype=np.float64)
    if q.shape != (model.dim,):
        raise DimensionError(f"query of shape {q.shape} does not match model dim {model.dim}")
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= len(model):
        raise ConfigError(f"k must be an integer in [1, {len(model)}], got {k!r}")
    return q


def _neighbor_order(model: KnnModel, q: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    # Explicit differences; the norm expansion perturbs exact distance ties.
    diff = model.points - q
    sq = np.einsum("ij,ij->i", diff, diff)
    # Stable sort keeps ascending training index among equal distances.
    order = np.argsort(sq, kind="stable")[:k]
    return order, sq[order]


def k_nearest(model: KnnModel, x: Sequence[float] | np.ndarray, k: int = DEFAULT_K) -> list[Neighbor]:
    q = _check_query(model, x, k)
    order, sq = _neighbor_order(model, q, k)
    return [Neighbor(int(i), float(np.sqrt(d))) for i, d in zip(order, sq)]


def _votes(model: KnnModel, order: np.ndarray) -> np.ndarray:
    return np.bincount(model.labels[order], minlength=model.n_classes)


def class_probabilities(model: KnnModel, x: Sequence[float] | np.ndarray, k: int = DEFAULT_K) -> np.ndarray:
    """Fraction of the ``k`` nearest neighbors carrying each class label."""
    q = _check_query(model, x, k)
    order, _ = _neighbor_order(model, q, k)
    return _votes(model, order) / k


def _decide(model: KnnModel, order: np.ndarray) -> int:
    votes = _votes(model, order)
    top = votes.max()
    # Walk neighbors by rank; the first whose class is among the leaders wins.
    for label in model.labels[order]:
        if votes[label] == top:
            return int(label)
    raise AssertionError("unreachable: some neighbor holds a maximal class")


def _warn_even(k: int) -> None:
    if k % 2 == 0:
        warnings.warn(f"k={k} is even; vote ties are more likely", DataWarning, stacklevel=3)


def predict(model: KnnModel, x: Sequence[float] | np.ndarray, k: int = DEFAULT_K) -> int:
    q = _check_query(model, x, k)
    _warn_even(k)
    order, _ = _neighbor_order(model, q, k)
    return _decide(model, order)


def predict_many(model: KnnModel, queries: np.ndarray | Sequence[Sequence[float]], k: int = DEFAULT_K) -> np.ndarray:
    """Predict each row of ``queries``; identical to calling :func:`predict` per row."""
    qs = np.asarray(queries, dtype=np.float64)
    if qs.ndim != 2:
        qs = qs.reshape(-1, model.dim) if qs.size else np.empty((0, model.dim))
    _warn_even(k)
    out = np.empty(qs.shape[0], dtype=np.int64)
    for i, row in enumerate(qs):
        q = _check_query(model, row, k)
        order, _ = _neighbor_order(model, q, k)
        out[i] = _decide(model, order)
    return out

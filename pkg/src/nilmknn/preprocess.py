"""Activity detection, windowing and dataset assembly."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataError, DimensionError, EmptyDatasetError
from .redd import PowerTrace

DEFAULT_THRESHOLD_WATTS = 10.0
DEFAULT_MIN_GAP = 4
DEFAULT_WINDOW_LEN = 50
NORMALIZE_MODES = ("none", "max", "zscore")


class ActivitySegment(NamedTuple):
    """Inclusive sample-index range ``[start, end]`` of one activity burst."""

    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1


def _powers(trace: PowerTrace | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(trace, PowerTrace):
        return trace.powers
    return np.asarray(trace, dtype=np.float64)


def detect_segments(
    trace: PowerTrace | Sequence[float],
    threshold_watts: float = DEFAULT_THRESHOLD_WATTS,
    min_gap: int = DEFAULT_MIN_GAP,
) -> list[ActivitySegment]:
    """Find runs where power sits at least ``threshold_watts`` above the trace median.

    Runs separated by fewer than ``min_gap`` inactive samples are merged,
    gap included.
    """
    if not threshold_watts > 0:
        raise ConfigError(f"threshold_watts must be positive, got {threshold_watts!r}")
    if min_gap < 0:
        raise ConfigError(f"min_gap must be non-negative, got {min_gap!r}")
    power = _powers(trace)
    if power.size == 0:
        return []
    baseline = float(np.median(power))
    active = (power - baseline) >= threshold_watts
    if not active.any():
        return []

    edges = np.diff(active.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1

    segments: list[ActivitySegment] = []
    cur_start, cur_end = int(starts[0]), int(ends[0])
    for s, e in zip(starts[1:], ends[1:]):
        gap = int(s) - cur_end - 1
        if gap < min_gap:
            cur_end = int(e)
        else:
            segments.append(ActivitySegment(cur_start, cur_end))
            cur_start, cur_end = int(s), int(e)
    segments.append(ActivitySegment(cur_start, cur_end))
    return segments


def normalize_window(window: np.ndarray, mode: str) -> np.ndarray:
    w = np.array(window, dtype=np.float64)
    if mode == "none":
        return w
    if mode == "max":
        peak = w.max()
        return w / peak if peak > 0 else w
    if mode == "zscore":
        std = w.std()
        if std == 0:
            return np.zeros_like(w)
        return (w - w.mean()) / std
    raise ConfigError(f"unknown normalize mode {mode!r}; expected one of {NORMALIZE_MODES}")


def extract_windows(
    trace: PowerTrace | Sequence[float],
    segments: Sequence[ActivitySegment | tuple[int, int]],
    window_len: int = DEFAULT_WINDOW_LEN,
    normalize: str = "none",
) -> list[np.ndarray]:
    """Cut each segment into consecutive non-overlapping windows of ``window_len``.

    Tails shorter than ``window_len`` are dropped.
    """
    if window_len < 1:
        raise ConfigError(f"window_len must be >= 1, got {window_len!r}")
    if normalize not in NORMALIZE_MODES:
        raise ConfigError(f"unknown normalize mode {normalize!r}; expected one of {NORMALIZE_MODES}")
    power = _powers(trace)
    windows: list[np.ndarray] = []
    for start, end in segments:
        if not 0 <= start <= end < power.size:
            raise ConfigError(f"segment ({start}, {end}) outside trace of {power.size} samples")
        count = (end - start + 1) // window_len
        for i in range(count):
            lo = start + i * window_len
            windows.append(normalize_window(power[lo : lo + window_len], normalize))
    return windows


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Windows stacked into an ``(n, window_len)`` matrix with integer labels."""

    windows: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    window_len: int

    def __post_init__(self) -> None:
        names = tuple(self.class_names)
        w = np.array(self.windows, dtype=np.float64)
        if w.size == 0:
            w = w.reshape(0, self.window_len)
        y = np.array(self.labels, dtype=np.int64).reshape(-1)
        if w.ndim != 2 or w.shape[1] != self.window_len:
            raise DimensionError(f"windows of shape {w.shape} do not match window_len {self.window_len}")
        if w.shape[0] != y.size:
            raise DimensionError(f"{w.shape[0]} windows but {y.size} labels")
        if list(names) != sorted(set(names)):
            raise ConfigError("class_names must be unique and sorted")
        if y.size and (y.min() < 0 or y.max() >= len(names)):
            raise ConfigError("label outside the class-name table")
        if not np.all(np.isfinite(w)):
            raise DataError("dataset contains non-finite window values")
        w.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "windows", w)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", names)

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices: Sequence[int] | np.ndarray) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.windows[idx], self.labels[idx], self.class_names, self.window_len)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and self.window_len == other.window_len
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.windows, other.windows)
        )

    __hash__ = None  # type: ignore[assignment]


def build_dataset(per_appliance: Mapping[str, Sequence[np.ndarray]]) -> LabeledDataset:
    names = sorted(per_appliance)
    lengths = {len(w) for name in names for w in per_appliance[name]}
    if not lengths:
        raise EmptyDatasetError("no windows for any appliance")
    if len(lengths) > 1:
        raise DimensionError(f"mixed window lengths {sorted(lengths)}")
    (window_len,) = lengths
    rows: list[np.ndarray] = []
    labels: list[int] = []
    for idx, name in enumerate(names):
        for w in per_appliance[name]:
            rows.append(np.asarray(w, dtype=np.float64))
            labels.append(idx)
    return LabeledDataset(np.vstack(rows), np.array(labels), tuple(names), window_len)


def classes_path_for(csv_path: str | Path) -> Path:
    """Side-car file holding class names, one per line in label order."""
    p = Path(csv_path)
    return p.with_name(p.stem + ".classes.txt")


def dataset_to_csv(dataset: LabeledDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label"] + [f"f{i}" for i in range(dataset.window_len)])
    for label, row in zip(dataset.labels, dataset.windows):
        writer.writerow([int(label)] + [repr(float(v)) for v in row])
    return buf.getvalue()


def write_dataset(dataset: LabeledDataset, path: str | Path) -> tuple[Path, Path]:
    path = Path(path)
    path.write_text(dataset_to_csv(dataset))
    side = classes_path_for(path)
    side.write_text("".join(f"{name}\n" for name in dataset.class_names))
    return path, side


def read_dataset(path: str | Path) -> LabeledDataset:
    path = Path(path)
    side = classes_path_for(path)
    if not side.is_file():
        raise DataError("class-name side-car file missing", source=str(side))
    names = tuple(line.strip() for line in side.read_text().splitlines() if line.strip())
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise DataError("CSV header must start with 'label'", source=str(path))
        window_len = len(header) - 1
        expected = ["label"] + [f"f{i}" for i in range(window_len)]
        if header != expected:
            raise DataError("CSV header must be label,f0,...,f{L-1}", source=str(path))
        labels: list[int] = []
        rows: list[list[float]] = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != window_len + 1:
                raise DataError(f"line {lineno}: expected {window_len + 1} fields", source=str(path))
            try:
                labels.append(int(rec[0]))
                vals = [float(v) for v in rec[1:]]
            except ValueError as exc:
                raise DataError(f"line {lineno}: {exc}", source=str(path)) from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError(f"line {lineno}: non-finite value", source=str(path))
            rows.append(vals)
    windows = np.array(rows, dtype=np.float64).reshape(len(rows), window_len)
    return LabeledDataset(windows, np.array(labels, dtype=np.int64), names, window_len)

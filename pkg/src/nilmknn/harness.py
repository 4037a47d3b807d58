"""Experiment configuration, stratified splitting, the end-to-end run and report rendering."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, NamedTuple, Union

import numpy as np

from . import knn
from .errors import ConfigError, DataWarning, EmptyDatasetError
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    MetricsReport,
    aggregate_report,
    build_confusion,
)
from .preprocess import (
    DEFAULT_MIN_GAP,
    DEFAULT_THRESHOLD_WATTS,
    DEFAULT_WINDOW_LEN,
    NORMALIZE_MODES,
    LabeledDataset,
    build_dataset,
    detect_segments,
    extract_windows,
)
from .redd import House, format_watts, load_house

REPORT_FORMATS = ("json", "csv", "text")
HouseRef = Union[int, str]


@dataclass
class ExperimentConfig:
    """All knobs of one run. Mirrors the JSON configuration file field for field.

    ``channel_selection`` maps an appliance (class) name to ``(house, channel)``
    pairs, where ``house`` is an index into ``house_dirs`` or a string equal to
    one of its entries or to an entry's directory name.
    """

    house_dirs: list[str] = field(default_factory=list)
    channel_selection: dict[str, list[tuple[HouseRef, int]]] = field(default_factory=dict)
    threshold_watts: float = DEFAULT_THRESHOLD_WATTS
    min_gap: int = DEFAULT_MIN_GAP
    window_len: int = DEFAULT_WINDOW_LEN
    normalize: str = "none"
    k: int = knn.DEFAULT_K
    train_frac: float = 0.9
    seed: int = 0
    output: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        self.house_dirs = [str(p) for p in self.house_dirs]
        sel: dict[str, list[tuple[HouseRef, int]]] = {}
        for name, pairs in dict(self.channel_selection).items():
            if not isinstance(name, str) or len(name.split()) != 1:
                raise ConfigError(f"appliance name {name!r} must be a single token")
            out = []
            for pair in pairs:
                if len(pair) != 2:
                    raise ConfigError(f"{name}: selection entries are [house, channel] pairs, got {pair!r}")
                house, ch = pair
                if not isinstance(ch, int) or isinstance(ch, bool) or ch < 1:
                    raise ConfigError(f"{name}: channel must be a positive integer, got {ch!r}")
                if not isinstance(house, (int, str)) or isinstance(house, bool):
                    raise ConfigError(f"{name}: house must be an index or a directory, got {house!r}")
                out.append((house, ch))
            sel[name] = out
        self.channel_selection = sel
        self.validate()

    def validate(self) -> None:
        if not 0 < self.train_frac < 1:
            raise ConfigError(f"train_frac must lie strictly between 0 and 1, got {self.train_frac!r}")
        if not _is_int(self.k) or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if not _is_int(self.window_len) or self.window_len < 1:
            raise ConfigError(f"window_len must be a positive integer, got {self.window_len!r}")
        if not _is_int(self.min_gap) or self.min_gap < 0:
            raise ConfigError(f"min_gap must be a non-negative integer, got {self.min_gap!r}")
        if not isinstance(self.threshold_watts, (int, float)) or not self.threshold_watts > 0:
            raise ConfigError(f"threshold_watts must be positive, got {self.threshold_watts!r}")
        if self.normalize not in NORMALIZE_MODES:
            raise ConfigError(f"normalize must be one of {NORMALIZE_MODES}, got {self.normalize!r}")
        if not _is_int(self.seed) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.format not in REPORT_FORMATS:
            raise ConfigError(f"format must be one of {REPORT_FORMATS}, got {self.format!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["channel_selection"] = {k: [list(p) for p in v] for k, v in self.channel_selection.items()}
        return d


def _is_int(v: object) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


class SplitIndices(NamedTuple):
    train: np.ndarray
    test: np.ndarray


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split(dataset: LabeledDataset, train_frac: float = 0.9, seed: int = 0) -> SplitIndices:
    """Per-class seeded shuffle, then the first ``round(count * train_frac)`` go to train.

    Every populated class keeps at least one training sample; a class with a
    single sample goes entirely to train.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    if not 0 < train_frac < 1:
        raise ConfigError(f"train_frac must lie strictly between 0 and 1, got {train_frac!r}")
    train: list[np.ndarray] = []
    test: list[np.ndarray] = []
    for cls in range(dataset.n_classes):
        idx = np.flatnonzero(dataset.labels == cls)
        if idx.size == 0:
            continue
        if idx.size == 1:
            warnings.warn(
                f"class {dataset.class_names[cls]!r} has a single sample; it goes to training only",
                DataWarning,
                stacklevel=2,
            )
        rng = np.random.default_rng([seed, cls])
        shuffled = idx[rng.permutation(idx.size)]
        n_train = max(1, _round_half_up(idx.size * train_frac))
        train.append(shuffled[:n_train])
        test.append(shuffled[n_train:])
    return SplitIndices(np.sort(np.concatenate(train)), np.sort(np.concatenate(test)))


def _resolve_house(ref: HouseRef, house_dirs: Sequence[str]) -> str:
    if isinstance(ref, int):
        if not 0 <= ref < len(house_dirs):
            raise ConfigError(f"house index {ref} out of range for {len(house_dirs)} house_dirs")
        return house_dirs[ref]
    for d in house_dirs:
        if ref == d or Path(ref) == Path(d) or ref == Path(d).name:
            return d
    raise ConfigError(f"house {ref!r} does not match any entry of house_dirs")


def load_houses(house_dirs: Iterable[str | Path]) -> dict[str, House]:
    return {str(d): load_house(d) for d in house_dirs}


def selection_from_labels(houses: Mapping[str, House], exclude: Iterable[str] = ("mains",)) -> dict[str, list[tuple[HouseRef, int]]]:
    """Use every labeled channel, grouping channels by their label as the class name."""
    skip = set(exclude)
    sel: dict[str, list[tuple[HouseRef, int]]] = {}
    for i, house in enumerate(houses.values()):
        for ch in sorted(house.labels):
            name = house.labels[ch]
            if name not in skip:
                sel.setdefault(name, []).append((i, ch))
    return sel


def build_experiment_dataset(config: ExperimentConfig, houses: Mapping[str, House] | None = None) -> LabeledDataset:
    """Load, select, detect activity and window every configured channel."""
    if not config.channel_selection:
        raise EmptyDatasetError("channel_selection is empty")
    if houses is None:
        houses = load_houses(config.house_dirs)
    per_appliance: dict[str, list[np.ndarray]] = {}
    for name in sorted(config.channel_selection):
        windows: list[np.ndarray] = []
        for ref, ch in config.channel_selection[name]:
            house = houses[_resolve_house(ref, config.house_dirs)]
            if ch not in house.traces:
                raise ConfigError(f"{name}: house {ref!r} has no channel {ch}")
            trace = house.traces[ch]
            segments = detect_segments(trace, config.threshold_watts, config.min_gap)
            windows.extend(extract_windows(trace, segments, config.window_len, config.normalize))
        if not windows:
            warnings.warn(f"appliance {name!r} produced no activity windows", DataWarning, stacklevel=2)
        per_appliance[name] = windows
    return build_dataset(per_appliance)


def evaluate(dataset: LabeledDataset, k: int, train_frac: float, seed: int) -> MetricsReport:
    split = stratified_split(dataset, train_frac, seed)
    if split.test.size == 0:
        raise ConfigError("the split left the test set empty; add data or lower train_frac")
    if k > split.train.size:
        raise ConfigError(f"k={k} exceeds the {split.train.size} training windows")
    model = knn.fit(dataset.subset(split.train))
    test = dataset.subset(split.test)
    predictions = knn.predict_many(model, test.windows, k)
    return aggregate_report(build_confusion(test.labels, predictions, dataset.class_names))


def run_experiment(config: ExperimentConfig) -> MetricsReport:
    dataset = build_experiment_dataset(config)
    return evaluate(dataset, config.k, config.train_frac, config.seed)


def _num(x: float) -> str:
    return format_watts(float(x))


def report_to_dict(report: MetricsReport) -> dict[str, Any]:
    return {
        "class_names": list(report.class_names),
        "per_class": [
            {
                "name": name,
                "precision": m.precision,
                "recall": m.recall,
                "f_measure": m.f_measure,
                "g_mean": m.g_mean,
                "precision_defined": m.precision_defined,
                "recall_defined": m.recall_defined,
            }
            for name, m in zip(report.class_names, report.per_class)
        ],
        "overall_accuracy": report.overall_accuracy,
        "error_rate": report.error_rate,
        "macro_f": report.macro_f,
        "macro_g": report.macro_g,
        "confusion": report.confusion.counts.tolist(),
        "normalized_confusion": report.normalized_confusion.tolist(),
    }


def report_from_dict(data: Mapping[str, Any]) -> MetricsReport:
    names = tuple(data["class_names"])
    per_class = tuple(
        ClassMetrics(
            precision=row["precision"],
            recall=row["recall"],
            f_measure=row["f_measure"],
            g_mean=row["g_mean"],
            precision_defined=row["precision_defined"],
            recall_defined=row["recall_defined"],
        )
        for row in data["per_class"]
    )
    return MetricsReport(
        per_class=per_class,
        overall_accuracy=data["overall_accuracy"],
        error_rate=data["error_rate"],
        macro_f=data["macro_f"],
        macro_g=data["macro_g"],
        confusion=ConfusionMatrix(np.array(data["confusion"], dtype=np.int64).reshape(len(names), len(names)), names),
        normalized_confusion=np.array(data["normalized_confusion"], dtype=np.float64).reshape(len(names), len(names)),
    )


def _render_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "precision", "recall", "f_measure", "g_mean", "accuracy"])
    for name, m in zip(report.class_names, report.per_class):
        w.writerow([name, _num(m.precision), _num(m.recall), _num(m.f_measure), _num(m.g_mean), ""])
    n = len(report.per_class)
    macro_p = math.fsum(m.precision for m in report.per_class) / n
    macro_r = math.fsum(m.recall for m in report.per_class) / n
    w.writerow(["overall", _num(macro_p), _num(macro_r), _num(report.macro_f), _num(report.macro_g), _num(report.overall_accuracy)])
    return buf.getvalue()


def _grid(header: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = []
    for r in [header, *rows]:
        cells = [r[0].ljust(widths[0])] + [c.rjust(wd) for c, wd in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return lines


def _render_text(report: MetricsReport) -> str:
    names = list(report.class_names)
    counts = report.confusion.counts
    lines = ["Confusion matrix (rows: actual, columns: predicted)"]
    lines += _grid(["actual\\predicted", *names], [[n, *(str(v) for v in row)] for n, row in zip(names, counts)])
    lines += ["", "Normalized confusion matrix (row fractions)"]
    lines += _grid(
        ["actual\\predicted", *names],
        [[n, *(f"{v:.3f}" for v in row)] for n, row in zip(names, report.normalized_confusion)],
    )
    lines += ["", "Channel-wise and overall F-measure and G-mean"]
    rows = []
    flagged = False
    for n, m in zip(names, report.per_class):
        mark = "" if (m.precision_defined and m.recall_defined) else "*"
        flagged = flagged or bool(mark)
        rows.append([n + mark, f"{m.f_measure:.3f}", f"{m.g_mean:.3f}", f"{m.precision:.3f}", f"{m.recall:.3f}"])
    rows.append(["Overall", f"{report.macro_f:.3f}", f"{report.macro_g:.3f}", "", ""])
    lines += _grid(["Channels", "F-measure", "G-mean", "Precision", "Recall"], rows)
    lines += ["", f"Accuracy: {report.overall_accuracy:.4f}   Error rate: {report.error_rate:.4f}   Test windows: {report.confusion.total}"]
    if flagged:
        lines.append("* precision or recall undefined (zero denominator), reported as 0")
    return "\n".join(lines) + "\n"


def render_report(report: MetricsReport, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(report_to_dict(report), indent=2) + "\n").encode()
    if fmt == "csv":
        return _render_csv(report).encode()
    if fmt == "text":
        return _render_text(report).encode()
    raise ConfigError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")


def recompute_report(data: Mapping[str, Any]) -> MetricsReport:
    """Rebuild a report from the confusion matrix stored in a serialized report."""
    names = tuple(data["class_names"])
    return aggregate_report(ConfusionMatrix(np.array(data["confusion"], dtype=np.int64), names))


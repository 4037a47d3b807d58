"""Reading and writing the REDD low-frequency on-disk format.

A house is a directory holding ``labels.dat`` (``<channel> <name>`` per
line) and one ``channel_<N>.dat`` per sub-metered circuit
(``<unix_timestamp> <watts>`` per line).
"""

from __future__ import annotations

import re
import warnings
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Union

import numpy as np

from .errors import (
    DataError,
    DataWarning,
    DuplicateChannelError,
    MissingChannelError,
    NegativePowerError,
    OrderingError,
    ParseError,
    StructureError,
)

TextInput = Union[bytes, str]

LABELS_FILE = "labels.dat"
CHANNEL_FILE_RE = re.compile(r"^channel_(\d+)\.dat$")

_INT_RE = re.compile(r"^[0-9]+$")
# Signed so that "-3.5" is reported as a negative power, not a syntax error.
_WATTS_RE = re.compile(r"^-?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)$")


@dataclass(frozen=True, eq=False)
class PowerTrace:
    """Timestamped power samples for one channel.

    Timestamps are integer seconds since the Unix epoch and strictly
    increasing; powers are non-negative watts. Arrays are read-only.
    """

    channel: int
    timestamps: np.ndarray
    powers: np.ndarray

    def __post_init__(self) -> None:
        if isinstance(self.channel, bool) or not isinstance(self.channel, (int, np.integer)) or self.channel < 1:
            raise DataError(f"channel must be a positive integer, got {self.channel!r}")
        ts = np.array(self.timestamps, dtype=np.int64).reshape(-1)
        pw = np.array(self.powers, dtype=np.float64).reshape(-1)
        if ts.shape != pw.shape:
            raise DataError(f"{ts.size} timestamps but {pw.size} power values")
        if ts.size > 1:
            bad = np.flatnonzero(np.diff(ts) <= 0)
            if bad.size:
                raise OrderingError(int(bad[0]) + 1)
        if not np.all(np.isfinite(pw)):
            idx = int(np.flatnonzero(~np.isfinite(pw))[0])
            raise DataError(f"non-finite power at sample index {idx}")
        neg = np.flatnonzero(pw < 0)
        if neg.size:
            raise NegativePowerError(int(neg[0]), float(pw[neg[0]]))
        ts.flags.writeable = False
        pw.flags.writeable = False
        object.__setattr__(self, "channel", int(self.channel))
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "powers", pw)

    @classmethod
    def from_samples(cls, channel: int, samples: Iterable[tuple[int, float]]) -> "PowerTrace":
        pairs = list(samples)
        ts = [t for t, _ in pairs]
        pw = [p for _, p in pairs]
        return cls(channel, np.array(ts, dtype=np.int64), np.array(pw, dtype=np.float64))

    @property
    def samples(self) -> list[tuple[int, float]]:
        return [(int(t), float(p)) for t, p in zip(self.timestamps, self.powers)]

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerTrace):
            return NotImplemented
        return (
            self.channel == other.channel
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.powers, other.powers)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class House:
    labels: Mapping[int, str]
    traces: Mapping[int, PowerTrace]
    path: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for ch, trace in self.traces.items():
            if ch not in self.labels:
                raise StructureError(f"trace for channel {ch} has no label")
            if trace.channel != ch:
                raise StructureError(f"trace stored under channel {ch} reports channel {trace.channel}")
        object.__setattr__(self, "labels", MappingProxyType(dict(self.labels)))
        object.__setattr__(self, "traces", MappingProxyType(dict(self.traces)))


def _lines(text: TextInput) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, tokens)`` for every non-blank line."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            line = text[: exc.start].count(b"\n") + 1
            raise ParseError("non-ASCII byte", line) from None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        tokens = raw.split()
        if tokens:
            yield lineno, tokens


def parse_labels(text: TextInput) -> dict[int, str]:
    labels: dict[int, str] = {}
    for lineno, tokens in _lines(text):
        if len(tokens) != 2:
            raise ParseError(f"expected '<channel> <name>', got {len(tokens)} tokens", lineno)
        if not _INT_RE.match(tokens[0]) or int(tokens[0]) < 1:
            raise ParseError(f"channel {tokens[0]!r} is not a positive integer", lineno)
        channel = int(tokens[0])
        if channel in labels:
            raise DuplicateChannelError(channel, lineno)
        labels[channel] = tokens[1]
    return labels


def parse_channel(text: TextInput, channel: int) -> PowerTrace:
    timestamps: list[int] = []
    powers: list[float] = []
    for lineno, tokens in _lines(text):
        if len(tokens) != 2:
            raise ParseError(f"expected '<timestamp> <watts>', got {len(tokens)} tokens", lineno)
        ts, watts = tokens
        if not _INT_RE.match(ts):
            raise ParseError(f"timestamp {ts!r} is not an integer", lineno)
        if not _WATTS_RE.match(watts):
            raise ParseError(f"power {watts!r} is not a decimal number", lineno)
        timestamps.append(int(ts))
        powers.append(float(watts))
    return PowerTrace(channel, np.array(timestamps, dtype=np.int64), np.array(powers, dtype=np.float64))


def format_watts(value: float) -> str:
    """Shortest positional decimal that parses back to exactly ``value``."""
    return np.format_float_positional(value, trim="-")


def write_channel(trace: PowerTrace) -> bytes:
    lines = [f"{int(t)} {format_watts(p)}\n" for t, p in zip(trace.timestamps, trace.powers)]
    return "".join(lines).encode("ascii")


def write_labels(labels: Mapping[int, str]) -> bytes:
    for name in labels.values():
        if not name or len(name.split()) != 1 or name != name.strip():
            raise DataError(f"appliance name {name!r} must be a single token")
    return "".join(f"{ch} {labels[ch]}\n" for ch in sorted(labels)).encode("ascii")


def load_house(directory: str | Path) -> House:
    directory = Path(directory)
    labels_path = directory / LABELS_FILE
    if not labels_path.is_file():
        raise StructureError(f"no {LABELS_FILE} found", source=str(directory))
    try:
        labels = parse_labels(labels_path.read_bytes())
    except DataError as exc:
        exc.source = str(labels_path)
        raise

    present: dict[int, Path] = {}
    for entry in sorted(directory.iterdir()):
        m = CHANNEL_FILE_RE.match(entry.name)
        if m and entry.is_file():
            present[int(m.group(1))] = entry

    for ch in sorted(present):
        if ch not in labels:
            warnings.warn(f"{present[ch]}: channel {ch} not listed in {LABELS_FILE}; skipped", DataWarning, stacklevel=2)

    traces: dict[int, PowerTrace] = {}
    for ch in sorted(labels):
        if ch not in present:
            raise MissingChannelError(ch, source=str(directory))
        try:
            traces[ch] = parse_channel(present[ch].read_bytes(), ch)
        except DataError as exc:
            exc.source = str(present[ch])
            raise
    return House(labels=labels, traces=traces, path=directory)


def save_house(house: House | tuple[Mapping[int, str], Mapping[int, PowerTrace]], directory: str | Path) -> Path:
    """Write labels and channel files; the inverse of :func:`load_house`."""
    if isinstance(house, House):
        labels, traces = house.labels, house.traces
    else:
        labels, traces = house
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / LABELS_FILE).write_bytes(write_labels(labels))
    for ch, trace in traces.items():
        (directory / f"channel_{ch}.dat").write_bytes(write_channel(trace))
    return directory

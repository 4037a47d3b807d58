"""Command-line entry point: ``nilmknn {ingest,windows,eval,synth}``.

Exit codes: 0 success, 1 configuration/validation error, 2 data/parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

from .errors import ConfigError, NilmError
from .harness import (
    REPORT_FORMATS,
    ExperimentConfig,
    build_experiment_dataset,
    evaluate,
    load_houses,
    render_report,
    selection_from_labels,
)
from .preprocess import NORMALIZE_MODES, write_dataset
from .synth import DEFAULT_PROFILES, ApplianceProfile, generate_corpus

log = logging.getLogger("nilmknn")

# CLI flag -> ExperimentConfig field
_OVERRIDES = {
    "threshold_watts": "threshold_watts",
    "min_gap": "min_gap",
    "window_len": "window_len",
    "normalize": "normalize",
    "k": "k",
    "train_frac": "train_frac",
    "seed": "seed",
    "format": "format",
    "out": "output",
}


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--house-dir", action="append", default=None, dest="house_dir", help="house directory (repeatable)")
    p.add_argument("--all-channels", action="store_true", help="select every non-mains channel, class = label name")
    p.add_argument("--threshold-watts", type=float)
    p.add_argument("--min-gap", type=int)
    p.add_argument("--window-len", type=int)
    p.add_argument("--normalize", choices=NORMALIZE_MODES)
    p.add_argument("--k", type=int)
    p.add_argument("--train-frac", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=REPORT_FORMATS)
    p.add_argument("--out", type=str)


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict[str, Any] = {}
    if args.config is not None:
        data = ExperimentConfig.from_json(args.config).to_dict()
    if args.house_dir:
        data["house_dirs"] = list(args.house_dir)
    for flag, name in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data)


def _houses_and_selection(config: ExperimentConfig, all_channels: bool):
    houses = load_houses(config.house_dirs)
    if all_channels:
        config.channel_selection = selection_from_labels(houses)
    return houses


def _emit(payload: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(payload)
        log.info("wrote %s", out)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if not config.house_dirs:
        raise ConfigError("no house directories given (--house-dir or config house_dirs)")
    houses = load_houses(config.house_dirs)
    summary = []
    for path, house in houses.items():
        channels = []
        for ch in sorted(house.traces):
            t = house.traces[ch]
            channels.append(
                {
                    "channel": ch,
                    "name": house.labels[ch],
                    "samples": len(t),
                    "first_timestamp": int(t.timestamps[0]) if len(t) else None,
                    "last_timestamp": int(t.timestamps[-1]) if len(t) else None,
                    "mean_watts": float(t.powers.mean()) if len(t) else None,
                }
            )
        summary.append({"house": path, "channels": channels})
    if config.format == "json":
        payload = (json.dumps(summary, indent=2) + "\n").encode()
    else:
        lines = []
        for entry in summary:
            lines.append(f"{entry['house']}: {len(entry['channels'])} channels")
            for c in entry["channels"]:
                mean = "-" if c["mean_watts"] is None else f"{c['mean_watts']:.1f} W"
                lines.append(f"  {c['channel']:>3}  {c['name']:<20} {c['samples']:>9} samples  mean {mean}")
        payload = ("\n".join(lines) + "\n").encode()
    _emit(payload, config.output)
    return 0


def cmd_windows(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if not config.output:
        raise ConfigError("windows needs --out for the CSV and its class-name side-car")
    houses = _houses_and_selection(config, args.all_channels)
    dataset = build_experiment_dataset(config, houses)
    csv_path, side = write_dataset(dataset, config.output)
    counts = ", ".join(f"{n}={c}" for n, c in zip(dataset.class_names, dataset.class_counts()))
    print(f"{len(dataset)} windows of length {dataset.window_len} ({counts}) -> {csv_path}, {side}", file=sys.stderr)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    houses = _houses_and_selection(config, args.all_channels)
    dataset = build_experiment_dataset(config, houses)
    report = evaluate(dataset, config.k, config.train_frac, config.seed)
    _emit(render_report(report, config.format), config.output)
    return 0


def _load_profiles(path: Path) -> list[ApplianceProfile]:
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read profiles {path}: {exc}") from None
    if not isinstance(raw, list):
        raise ConfigError(f"{path}: expected a JSON list of profiles")
    try:
        return [ApplianceProfile(**item) for item in raw]
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def cmd_synth(args: argparse.Namespace) -> int:
    profiles = _load_profiles(args.profiles) if args.profiles else list(DEFAULT_PROFILES)
    if args.dump_profiles:
        print(json.dumps([asdict(p) for p in profiles], indent=2))
        return 0
    if not args.out:
        raise ConfigError("synth needs --out DIR")
    path = generate_corpus(profiles, args.n_samples, args.seed, args.out)
    print(f"wrote {len(profiles)} channels x {args.n_samples} samples to {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilmknn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize house directories")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("windows", help="write the windowed dataset as CSV")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("eval", help="split, fit, predict and report")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic REDD-format house")
    p.add_argument("--out", type=str, help="house directory to create")
    p.add_argument("--n-samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profiles", type=Path, help="JSON list of ApplianceProfile objects")
    p.add_argument("--dump-profiles", action="store_true", help="print the profiles as JSON and exit")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    logging.captureWarnings(True)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        try:
            return args.func(args)
        except NilmError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return exc.exit_code
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2


if __name__ == "__main__":
    sys.exit(main())

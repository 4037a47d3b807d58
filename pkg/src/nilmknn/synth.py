"""Seeded synthetic appliance traces written as REDD-format houses."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .redd import PowerTrace, save_house

DEFAULT_START_TS = 1303132929
DEFAULT_SAMPLE_PERIOD = 3


@dataclass(frozen=True)
class ApplianceProfile:
    """On/off rectangular duty cycle with jittered durations and additive noise."""

    name: str
    on_power: float
    standby_power: float = 0.0
    on_duration: int = 100
    off_duration: int = 200
    noise_sigma: float = 0.0
    jitter: float = 0.0

    def __post_init__(self) -> None:
        if not self.name or len(self.name.split()) != 1 or self.name != self.name.strip():
            raise ConfigError(f"profile name {self.name!r} must be a single token")
        if not self.on_power > 0:
            raise ConfigError(f"{self.name}: on_power must be positive")
        if self.standby_power < 0:
            raise ConfigError(f"{self.name}: standby_power must be non-negative")
        if not self.on_power > self.standby_power:
            raise ConfigError(f"{self.name}: on_power must exceed standby_power")
        if self.on_duration < 1 or self.off_duration < 1:
            raise ConfigError(f"{self.name}: durations must be at least one sample")
        if self.noise_sigma < 0:
            raise ConfigError(f"{self.name}: noise_sigma must be non-negative")
        if not 0 <= self.jitter < 1:
            raise ConfigError(f"{self.name}: jitter must lie in [0, 1)")


# Stand-ins for the seven appliance classes, spread over 80-1800 W.
DEFAULT_PROFILES: tuple[ApplianceProfile, ...] = (
    ApplianceProfile("bath_gfi", 1100.0, 1.0, 120, 300, 4.0, 0.2),
    ApplianceProfile("electronics", 80.0, 2.0, 200, 350, 2.0, 0.2),
    ApplianceProfile("furnace", 400.0, 3.0, 250, 400, 4.0, 0.2),
    ApplianceProfile("kitchen_outlet", 250.0, 1.0, 150, 300, 3.0, 0.2),
    ApplianceProfile("microwave", 1800.0, 2.0, 100, 350, 6.0, 0.2),
    ApplianceProfile("oven", 1450.0, 0.5, 300, 450, 5.0, 0.2),
    ApplianceProfile("washer_dryer", 700.0, 1.5, 220, 380, 5.0, 0.2),
)


def _duration(base: int, jitter: float, rng: np.random.Generator) -> int:
    if jitter == 0:
        return base
    return max(1, int(round(base * (1.0 + rng.uniform(-jitter, jitter)))))


def generate_trace(
    profile: ApplianceProfile,
    n_samples: int,
    start_ts: int = DEFAULT_START_TS,
    sample_period: int = DEFAULT_SAMPLE_PERIOD,
    seed: int = 0,
    channel: int = 1,
) -> PowerTrace:
    """Alternate off/on pulses (starting off), add Gaussian noise, clamp at zero.

    Powers are quantised to 0.01 W like the public low-frequency files.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be positive")
    if sample_period < 1:
        raise ConfigError("sample_period must be a positive number of seconds")
    rng = np.random.default_rng(seed)
    power = np.empty(n_samples, dtype=np.float64)
    i, on = 0, False
    while i < n_samples:
        if on:
            d = _duration(profile.on_duration, profile.jitter, rng)
            power[i : i + d] = profile.on_power
        else:
            d = _duration(profile.off_duration, profile.jitter, rng)
            power[i : i + d] = profile.standby_power
        i += d
        on = not on
    if profile.noise_sigma > 0:
        power += rng.normal(0.0, profile.noise_sigma, n_samples)
    # + 0.0 turns any -0.0 produced by the clamp into +0.0.
    power = np.round(np.maximum(power, 0.0), 2) + 0.0
    timestamps = start_ts + sample_period * np.arange(n_samples, dtype=np.int64)
    return PowerTrace(channel, timestamps, power)


def generate_traces(
    profiles: Sequence[ApplianceProfile],
    n_samples: int,
    seed: int = 0,
    start_ts: int = DEFAULT_START_TS,
    sample_period: int = DEFAULT_SAMPLE_PERIOD,
) -> tuple[dict[int, str], dict[int, PowerTrace]]:
    """Labels and traces for ``profiles`` on channels 1..n, without touching disk."""
    names = [p.name for p in profiles]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate profile names in {names}")
    seeds = np.random.SeedSequence(seed).spawn(len(profiles))
    labels: dict[int, str] = {}
    traces: dict[int, PowerTrace] = {}
    for ch, (profile, ss) in enumerate(zip(profiles, seeds), start=1):
        labels[ch] = profile.name
        traces[ch] = generate_trace(
            profile,
            n_samples,
            start_ts=start_ts,
            sample_period=sample_period,
            seed=int(ss.generate_state(1, dtype=np.uint64)[0]),
            channel=ch,
        )
    return labels, traces


def generate_corpus(
    profiles: Sequence[ApplianceProfile],
    n_samples: int,
    seed: int,
    directory: str | Path,
    start_ts: int = DEFAULT_START_TS,
    sample_period: int = DEFAULT_SAMPLE_PERIOD,
) -> Path:
    labels, traces = generate_traces(profiles, n_samples, seed, start_ts, sample_period)
    return save_house((labels, traces), directory)

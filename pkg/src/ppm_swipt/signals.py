"""Sampled signal containers, power bookkeeping and seeded RNG streams.

Signals are immutable once built: the sample buffer is flagged read-only so a
waveform can be handed to several Monte Carlo workers without copying.
Powers are in watts, voltages in volts, times in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySignal, InvalidConfig, ZeroPower

__all__ = [
    "Waveform",
    "RealTrace",
    "SimSeed",
    "mean_square",
    "papr",
    "dbm_to_watt",
    "watt_to_dbm",
]


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled complex-baseband signal.

    ``samples`` are in sqrt(W) so that ``|x|**2`` is instantaneous power.
    ``avg_power_w`` is computed at construction.
    """

    samples: np.ndarray
    sample_rate_hz: float
    avg_power_w: float = field(init=False)

    def __post_init__(self):
        samples = _frozen_array(self.samples, np.complex128)
        if samples.size == 0:
            raise EmptySignal("waveform has no samples")
        if not self.sample_rate_hz > 0:
            raise InvalidConfig("sample_rate_hz must be positive", sample_rate_hz=self.sample_rate_hz)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "avg_power_w", float(np.mean(np.abs(samples) ** 2)))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def time_s(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate_hz

    def envelope(self) -> np.ndarray:
        return np.abs(self.samples)

    def scaled(self, factor: complex) -> "Waveform":
        return Waveform(self.samples * factor, self.sample_rate_hz)


@dataclass(frozen=True, eq=False)
class RealTrace:
    """Uniformly sampled real voltage trace (v_DC, y, y[n], M[n])."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = _frozen_array(self.samples, np.float64)
        if samples.size == 0:
            raise EmptySignal("trace has no samples")
        if not self.sample_rate_hz > 0:
            raise InvalidConfig("sample_rate_hz must be positive", sample_rate_hz=self.sample_rate_hz)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    @property
    def time_s(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate_hz


@dataclass(frozen=True)
class SimSeed:
    """Root seed plus stream id; ``generator(*keys)`` derives independent sub-streams.

    Sub-streams are keyed, not spawned in order, so a result never depends on
    how many other streams were drawn before it or on worker scheduling.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < 2**64:
                raise InvalidConfig(f"{name} must be a 64-bit unsigned integer", **{name: value})

    def sequence(self, *keys: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), *map(int, keys)))

    def generator(self, *keys: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence(*keys)))

    def substream(self, stream_id: int) -> "SimSeed":
        return SimSeed(self.seed, stream_id)


def _samples_of(trace) -> np.ndarray:
    if isinstance(trace, (Waveform, RealTrace)):
        return trace.samples
    arr = np.asarray(trace)
    if arr.size == 0:
        raise EmptySignal("trace has no samples")
    return arr


def mean_square(trace) -> float:
    """Arithmetic mean of ``|sample|**2`` (W for waveforms, V^2 for traces)."""
    samples = _samples_of(trace)
    return float(np.mean(np.abs(samples) ** 2))


def papr(waveform: Waveform) -> float:
    avg = mean_square(waveform)
    if avg <= 0:
        raise ZeroPower("peak-to-average ratio undefined for a zero-power waveform")
    return float(np.max(np.abs(waveform.samples) ** 2) / avg)


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watt_to_dbm(p_w: float) -> float:
    if p_w <= 0:
        return -math.inf
    return 10.0 * math.log10(p_w / 1e-3)

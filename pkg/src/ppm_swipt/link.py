"""End-to-end M-PPM link: modulator -> channel -> rectifier -> noise -> decoder.

Long runs are processed in symbol-aligned blocks. The capacitor voltage and
the moving-average history are carried across block boundaries, so the result
is identical to processing the whole trace at once. Synthesis runs at one
sample per ADC sample (``samples_per_chip = L``), so the ADC stage only
quantises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, apply_channel
from .errors import InvalidConfig
from .modulator import MessageSequence, PpmConfig, bits_to_messages, messages_to_bits, modulate_ppm
from .receiver import DemodConfig, decode_symbols, moving_average_array, quantize
from .rectifier import (
    RectifierParams,
    RectNoiseParams,
    RippleStats,
    integrate_drive,
    noise_sigma,
)
from .signals import RealTrace, SimSeed, Waveform
from .metrics import ber as bit_error_rate, BerResult

__all__ = ["PpmLink", "LinkRun", "NoiseOutcome", "settled_rectify", "settling_blocks",
           "random_messages", "STREAM_BITS", "STREAM_NOISE"]

# sub-stream keys under a point's SimSeed
STREAM_BITS = 1
STREAM_NOISE = 2
STREAM_BASELINE = 3


def settling_blocks(block_duration_s: float, rect: RectifierParams, minimum: int = 3) -> int:
    """Number of repeated leading blocks covering max(5 R_load C_out, ``minimum`` blocks)."""
    return max(minimum, math.ceil(5.0 * rect.time_constant_s / block_duration_s - 1e-9))


def random_messages(m_order: int, n_symbols: int, seed: SimSeed) -> tuple[np.ndarray, MessageSequence]:
    k = int(math.log2(m_order))
    bits = seed.generator(STREAM_BITS).integers(0, 2, size=n_symbols * k, dtype=np.uint8)
    return bits, bits_to_messages(bits, m_order)


@dataclass
class NoiseOutcome:
    noise: RectNoiseParams
    sigma_v: float
    decoded: MessageSequence
    ber: BerResult


@dataclass
class LinkRun:
    messages: MessageSequence
    tx_bits: np.ndarray
    outcomes: list[NoiseOutcome]
    ripple: RippleStats
    mean_square_v: float
    p_del_w: float
    settling_symbols: int
    traces: dict = field(default_factory=dict)


class _Moments:
    """Streaming mean / mean-square / extrema of the data part of v_DC."""

    def __init__(self):
        self.n = 0
        self.ref = None
        self.s1 = 0.0
        self.s2 = 0.0
        self.sq = 0.0
        self.lo = math.inf
        self.hi = -math.inf

    def add(self, v: np.ndarray):
        if v.size == 0:
            return
        if self.ref is None:
            self.ref = float(np.mean(v))
        d = v - self.ref
        self.n += v.size
        self.s1 += float(np.sum(d))
        self.s2 += float(np.sum(d * d))
        self.sq += float(np.sum(v * v))
        self.lo = min(self.lo, float(v.min()))
        self.hi = max(self.hi, float(v.max()))

    @property
    def mean(self) -> float:
        return self.ref + self.s1 / self.n

    @property
    def mean_square(self) -> float:
        return self.sq / self.n

    def ripple(self) -> RippleStats:
        var = max(self.s2 / self.n - (self.s1 / self.n) ** 2, 0.0)
        mean = self.mean
        factor = math.sqrt(var) / mean if mean > 0 else math.nan
        return RippleStats(self.hi - self.lo, factor, mean)


class PpmLink:
    """One operating point of the M-PPM link with the behavioural rectifier."""

    def __init__(self, m_order: int, bandwidth_hz: float, rect: RectifierParams,
                 channel: ChannelParams | None = None, adc_rate_hz: float = 2e9,
                 adc_bits: int | None = None, adc_full_scale_v: float = 1.0,
                 tx_power_w: float = 1.0, block_samples: int = 2**21):
        demod = DemodConfig.for_ppm(m_order, bandwidth_hz, adc_rate_hz)
        window = demod.window_samples
        self.rect = rect
        self.channel = channel if channel is not None else ChannelParams(rx_power_dbm_override=-20.0)
        self.ppm = PpmConfig(m_order, bandwidth_hz, tx_power_w, samples_per_chip=window)
        # ADC clock locked to the chip rate
        self.demod = DemodConfig(self.ppm.sample_rate_hz, window, demod.samples_per_symbol,
                                 adc_bits, adc_full_scale_v)
        self.dt_max = min(self.ppm.chip_duration_s / 32.0, rect.time_constant_s / 100.0)
        self.n_settle = settling_blocks(self.ppm.symbol_duration_s, rect)
        self.block_symbols = max(1, block_samples // self.ppm.samples_per_symbol)
        self._levels = self._drive_levels()

    @property
    def m_order(self) -> int:
        return self.ppm.m_order

    @property
    def window(self) -> int:
        return self.demod.window_samples

    def rx_waveform(self, messages: MessageSequence) -> Waveform:
        return apply_channel(modulate_ppm(messages, self.ppm), self.channel)

    def _drive_levels(self) -> tuple[float, float]:
        # the received envelope is two-level; take both levels from one real symbol
        probe = self.rx_waveform(MessageSequence([1], self.m_order))
        pulse = float(np.abs(probe.samples[0]))
        self.rx_pulse_amplitude = pulse
        self.rx_power_w = probe.avg_power_w
        on, off = self.rect.drive_exponent(self.rect.envelope_voltage(np.array([pulse, 0.0])))
        return float(on), float(off)

    def _drive(self, msgs: np.ndarray) -> np.ndarray:
        on, off = self._levels
        grid = np.full((msgs.size, self.ppm.chips_per_symbol, self.window), off)
        grid[np.arange(msgs.size), msgs - 1, :] = on
        return grid.reshape(-1)

    def _blocks(self, messages: MessageSequence):
        """Yield (first_symbol_index, messages, v_DC) blocks; indices < 0 are settling."""
        msgs = messages.messages
        prefix = np.full(self.n_settle, msgs[0])
        stream = np.concatenate([prefix, msgs])
        v = 0.0
        for start in range(0, stream.size, self.block_symbols):
            chunk = stream[start:start + self.block_symbols]
            out = integrate_drive(self._drive(chunk), self.ppm.sample_rate_hz, self.rect, self.dt_max, v)
            v = float(out[-1])
            yield start - self.n_settle, chunk, out

    def noiseless_stats(self, messages: MessageSequence) -> _Moments:
        stats = _Moments()
        for first, _, v in self._blocks(messages):
            stats.add(v[max(0, -first) * self.ppm.samples_per_symbol:])
        return stats

    def run(self, messages: MessageSequence, noises, seed: SimSeed, tx_bits=None,
            keep_traces: bool = False, cache_limit: int = 25_000_000) -> LinkRun:
        """Simulate ``messages`` once per noise setting with common noise draws.

        The same standard-normal sequence is scaled by each setting's sigma, so
        BER differences across SNR reflect the SNR rather than fresh noise.
        """
        noises = list(noises)
        if messages.m_order != self.m_order:
            raise InvalidConfig("message alphabet does not match the link")
        if tx_bits is None:
            tx_bits = messages_to_bits(messages)
        sps = self.ppm.samples_per_symbol
        total = (len(messages) + self.n_settle) * sps

        cached = [] if total <= cache_limit else None
        stats = _Moments()
        for first, chunk, v in self._blocks(messages):
            stats.add(v[max(0, -first) * sps:])
            if cached is not None:
                cached.append((first, chunk, v))
        sigmas = [noise_sigma(n, stats.mean_square) for n in noises]
        blocks = cached if cached is not None else self._blocks(messages)

        histories = [None] * len(noises)
        decoded = [[] for _ in noises]
        traces = {"x": [], "v_dc": [], "y": [[] for _ in noises], "ma": [[] for _ in noises]}
        for b, (first, chunk, v) in enumerate(blocks):
            z = seed.generator(STREAM_NOISE, b).standard_normal(v.size) if any(sigmas) else None
            keep_from = max(0, -first)
            for j, sigma in enumerate(sigmas):
                y = v + sigma * z if sigma else v
                if self.demod.adc_bits is not None:
                    y = quantize(y, self.demod.adc_bits, self.demod.adc_full_scale_v)
                ma = moving_average_array(y, self.window, histories[j])
                histories[j] = y[-(self.window - 1):] if self.window > 1 else None
                dec = decode_symbols(ma.reshape(-1, sps), self.window, self.m_order)
                decoded[j].append(dec[keep_from:])
                if keep_traces:
                    traces["y"][j].append(y)
                    traces["ma"][j].append(ma)
            if keep_traces:
                traces["x"].append(np.where(self._drive(chunk) != self._levels[1],
                                            self.rx_pulse_amplitude, 0.0))
                traces["v_dc"].append(v)

        outcomes = []
        for noise, sigma, parts in zip(noises, sigmas, decoded):
            rx_msgs = MessageSequence(np.concatenate(parts), self.m_order)
            outcomes.append(NoiseOutcome(noise, sigma, rx_msgs,
                                         bit_error_rate(tx_bits, messages_to_bits(rx_msgs))))
        if keep_traces:
            traces = {
                "x": np.concatenate(traces["x"]),
                "v_dc": np.concatenate(traces["v_dc"]),
                "y": [np.concatenate(t) for t in traces["y"]],
                "ma": [np.concatenate(t) for t in traces["ma"]],
                "settling_samples": self.n_settle * sps,
            }
        else:
            traces = {}
        return LinkRun(messages, np.asarray(tx_bits), outcomes, stats.ripple(), stats.mean_square,
                       stats.mean_square / self.rect.r_load, self.n_settle, traces)


def settled_rectify(rx: Waveform, rect: RectifierParams, block_samples: int,
                    dt_max: float | None = None) -> RealTrace:
    """Rectify ``rx`` after a settling run of its first block repeated.

    Only the response to ``rx`` itself is returned.
    """
    if block_samples < 1 or block_samples > len(rx):
        raise InvalidConfig("block_samples must lie in 1..len(rx)")
    n_pre = settling_blocks(block_samples / rx.sample_rate_hz, rect)
    if dt_max is None:
        dt_max = rect.time_constant_s / 100.0
    first = rect.drive_exponent(rect.envelope_voltage(rx.samples[:block_samples]))
    pre = integrate_drive(np.tile(first, n_pre), rx.sample_rate_hz, rect, dt_max, 0.0)
    drive = rect.drive_exponent(rect.envelope_voltage(rx.samples))
    return RealTrace(integrate_drive(drive, rx.sample_rate_hz, rect, dt_max, float(pre[-1])),
                     rx.sample_rate_hz)

"""Information decoder of the integrated receiver.

ADC -> causal moving average over one chip -> per-symbol peak search with the
decision boundaries shifted one chip late -> Gray demapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfig, UndersampledSource
from .modulator import MessageSequence, messages_to_bits
from .signals import RealTrace

__all__ = [
    "DemodConfig",
    "DemodResult",
    "adc_sample",
    "quantize",
    "moving_average",
    "moving_average_array",
    "chips_to_messages",
    "decode_symbol",
    "decode_symbols",
    "demodulate",
]


@dataclass(frozen=True)
class DemodConfig:
    """ADC and symbol timing for the decoder.

    ``window_samples`` is the moving-average length L, one chip at the ADC
    rate. ``adc_bits=None`` means an ideal (unquantised) converter.
    """

    adc_rate_hz: float
    window_samples: int
    samples_per_symbol: int
    adc_bits: int | None = None
    adc_full_scale_v: float = 1.0
    symbol_offset: int = 0

    def __post_init__(self):
        if not self.adc_rate_hz > 0:
            raise InvalidConfig("adc_rate_hz must be positive")
        if self.window_samples < 2:
            raise InvalidConfig("window length L must be >= 2", window_samples=self.window_samples)
        if self.samples_per_symbol % self.window_samples:
            raise InvalidConfig("samples_per_symbol must be a multiple of L")
        if self.adc_bits is not None and self.adc_bits < 1:
            raise InvalidConfig("adc_bits must be >= 1 or None")
        if not self.adc_full_scale_v > 0:
            raise InvalidConfig("adc_full_scale_v must be positive")
        if self.symbol_offset < 0:
            raise InvalidConfig("symbol_offset must be non-negative")

    @classmethod
    def for_ppm(cls, m_order: int, bandwidth_hz: float, adc_rate_hz: float = 2e9,
                adc_bits: int | None = None, adc_full_scale_v: float = 1.0,
                symbol_offset: int = 0) -> "DemodConfig":
        exact = adc_rate_hz / bandwidth_hz
        window = int(round(exact))
        if window < 2 or abs(exact - window) > 0.01 * window:
            raise InvalidConfig("chip duration is not an integer number of ADC samples",
                                samples_per_chip=exact)
        return cls(adc_rate_hz, window, (m_order + 1) * window, adc_bits, adc_full_scale_v,
                   symbol_offset)

    @property
    def chips_per_symbol(self) -> int:
        return self.samples_per_symbol // self.window_samples


class DemodResult(NamedTuple):
    messages: MessageSequence
    bits: np.ndarray


def quantize(values: np.ndarray, bits: int, full_scale_v: float) -> np.ndarray:
    """Uniform quantiser with 2**bits levels spanning [0, full_scale_v]."""
    top = 2**bits - 1
    codes = np.clip(np.rint(np.asarray(values) / full_scale_v * top), 0, top)
    return codes * (full_scale_v / top)


def adc_sample(y: RealTrace, cfg: DemodConfig) -> RealTrace:
    """Nearest-sample decimation to the ADC rate, then optional quantisation."""
    ratio = y.sample_rate_hz / cfg.adc_rate_hz
    if ratio < 1.0 - 1e-9:
        raise UndersampledSource("ADC rate exceeds the source sample rate",
                                 adc_rate_hz=cfg.adc_rate_hz, source_rate_hz=y.sample_rate_hz)
    if abs(ratio - 1.0) <= 1e-9:
        samples = y.samples
    else:
        n_out = int(math.floor(len(y) / ratio + 1e-9))
        idx = np.minimum(np.rint(np.arange(n_out) * ratio).astype(np.int64), len(y) - 1)
        samples = y.samples[idx]
    if cfg.adc_bits is not None:
        samples = quantize(samples, cfg.adc_bits, cfg.adc_full_scale_v)
    return RealTrace(samples, cfg.adc_rate_hz)


def moving_average_array(y: np.ndarray, window: int, history: np.ndarray | None = None) -> np.ndarray:
    """Causal length-``window`` mean.

    ``history`` holds the ``window - 1`` samples preceding ``y`` (a previous
    block); without it the first outputs average over the available prefix.
    """
    y = np.asarray(y, dtype=np.float64)
    if window < 1:
        raise InvalidConfig("moving-average length must be >= 1")
    if window == 1:
        return y.copy()
    if history is not None:
        history = np.asarray(history, dtype=np.float64)[-(window - 1):]
    else:
        history = np.empty(0)
    full = np.concatenate([history, y])
    # centre before summing to keep the running sum well conditioned
    offset = float(np.mean(full))
    csum = np.concatenate([[0.0], np.cumsum(full - offset)])
    n_hist = history.size
    ends = np.arange(n_hist + 1, full.size + 1)
    starts = np.maximum(ends - window, 0)
    return (csum[ends] - csum[starts]) / (ends - starts) + offset


def moving_average(y_n: RealTrace, window: int) -> RealTrace:
    if len(y_n) < window:
        raise InvalidConfig("trace shorter than the averaging window", n=len(y_n), window=window)
    return RealTrace(moving_average_array(y_n.samples, window), y_n.sample_rate_hz)


def chips_to_messages(chip_index, m_order: int):
    """Shifted decision boundaries: the peak lags one chip, so chip c decodes to message c.

    The guard chip (index M) decodes to M; a peak in the first chip, which
    only noise can produce, decodes to the nearest message 1.
    """
    c = np.asarray(chip_index)
    return np.clip(c, 1, m_order)


def decode_symbols(segments: np.ndarray, window: int, m_order: int) -> np.ndarray:
    """Vectorised ``decode_symbol`` over rows of an (n_symbols, (M+1) L) array."""
    segments = np.asarray(segments)
    if segments.shape[-1] != (m_order + 1) * window:
        raise InvalidConfig("segment length must be (M+1) L", length=segments.shape[-1])
    # argmax returns the first maximum, so ties fall to the earliest sample
    peak = np.argmax(segments, axis=-1)
    return chips_to_messages(peak // window, m_order)


def decode_symbol(m_n, cfg: DemodConfig, m_order: int) -> int:
    segment = m_n.samples if isinstance(m_n, RealTrace) else np.asarray(m_n, dtype=np.float64)
    if segment.size != cfg.samples_per_symbol or cfg.chips_per_symbol != m_order + 1:
        raise InvalidConfig("segment does not span one (M+1)-chip symbol",
                            length=int(segment.size), expected=cfg.samples_per_symbol)
    return int(decode_symbols(segment[None, :], cfg.window_samples, m_order)[0])


def demodulate(y: RealTrace, cfg: DemodConfig, m_order: int) -> DemodResult:
    """Full decoder: ADC, moving average, per-symbol peak decision, Gray demap."""
    if cfg.chips_per_symbol != m_order + 1:
        raise InvalidConfig("config symbol length does not match m_order")
    y_n = adc_sample(y, cfg)
    m_n = moving_average(y_n, cfg.window_samples).samples
    body = m_n[cfg.symbol_offset:]
    if body.size == 0 or body.size % cfg.samples_per_symbol:
        raise InvalidConfig("trace does not hold a whole number of symbols after symbol_offset",
                            samples=int(body.size), samples_per_symbol=cfg.samples_per_symbol)
    segments = body.reshape(-1, cfg.samples_per_symbol)
    messages = MessageSequence(decode_symbols(segments, cfg.window_samples, m_order), m_order)
    return DemodResult(messages, messages_to_bits(messages))

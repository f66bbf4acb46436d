"""Figures of merit: throughput, BER with Wilson intervals, power gain, empirical CDF."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import EmptySignal, InvalidConfig, LengthMismatch

__all__ = [
    "OperatingPoint",
    "SweepResult",
    "BerResult",
    "throughput",
    "effective_throughput",
    "wilson_interval",
    "ber",
    "gain_over_cw",
    "empirical_cdf",
]

Z95 = 1.959963984540054


@dataclass(frozen=True)
class OperatingPoint:
    m_order: int
    bandwidth_hz: float
    rect_preset: str
    n_symbols: int
    seed: int
    snr_db: float | None = None
    rx_power_dbm: float | None = None
    sigma_v: float | None = None

    def __post_init__(self):
        if self.n_symbols < 100:
            raise InvalidConfig("a reported BER needs at least 100 symbols", n_symbols=self.n_symbols)


@dataclass
class SweepResult:
    point: OperatingPoint
    ber: float
    ci95_ber: tuple[float, float]
    n_bit_errors: int
    n_bits: int
    throughput_bps: float
    effective_throughput_bps: float
    p_del_w: float
    ripple_factor: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.ci95_ber
        if not (0.0 <= lo <= self.ber <= hi <= 1.0):
            raise InvalidConfig("BER outside its confidence interval", ber=self.ber, ci=self.ci95_ber)

    def as_row(self) -> dict:
        row = asdict(self.point)
        row.update(
            ber=self.ber,
            ber_ci95_lo=self.ci95_ber[0],
            ber_ci95_hi=self.ci95_ber[1],
            n_bit_errors=self.n_bit_errors,
            n_bits=self.n_bits,
            throughput_bps=self.throughput_bps,
            effective_throughput_bps=self.effective_throughput_bps,
            p_del_w=self.p_del_w,
            ripple_factor=self.ripple_factor,
        )
        row.update(self.extra)
        return row


class BerResult(NamedTuple):
    ber: float
    ci95: tuple[float, float]
    n_errors: int
    n_bits: int


def throughput(m_order: int, bandwidth_hz: float) -> float:
    """Raw M-PPM bit rate, BW / (M + 1) * log2 M."""
    if m_order < 2 or m_order & (m_order - 1):
        raise InvalidConfig("m_order must be a power of two >= 2")
    if not bandwidth_hz > 0:
        raise InvalidConfig("bandwidth must be positive")
    return bandwidth_hz / (m_order + 1) * math.log2(m_order)


def effective_throughput(m_order: int, bandwidth_hz: float, bit_error_rate: float) -> float:
    return throughput(m_order, bandwidth_hz) * (1.0 - bit_error_rate)


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise InvalidConfig("Wilson interval needs at least one trial")
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the bounds are exact at the ends; rounding would otherwise leave ~1e-19
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


def ber(tx_bits, rx_bits) -> BerResult:
    tx = np.asarray(tx_bits).reshape(-1)
    rx = np.asarray(rx_bits).reshape(-1)
    if tx.size != rx.size:
        raise LengthMismatch("bit streams differ in length", tx=int(tx.size), rx=int(rx.size))
    if tx.size == 0:
        raise EmptySignal("no bits to compare")
    errors = int(np.count_nonzero(tx != rx))
    rate = errors / tx.size
    lo, hi = wilson_interval(errors, tx.size)
    # guard the interval against rounding at 0 and 1
    return BerResult(rate, (min(lo, rate), max(hi, rate)), errors, int(tx.size))


def gain_over_cw(p_del: float, p_del_cw: float) -> float:
    """Harvested power relative to CW, in percent."""
    if not p_del_cw > 0:
        raise InvalidConfig("CW reference power must be positive")
    return 100.0 * p_del / p_del_cw


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Right-continuous empirical CDF as (sorted values, cumulative probability)."""
    x = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    if x.size == 0:
        raise EmptySignal("empirical CDF of an empty sample")
    # one step per distinct value, height = fraction of samples <= value
    uniq, counts = np.unique(x, return_counts=True)
    return uniq, np.cumsum(counts) / x.size

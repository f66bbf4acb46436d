"""M-PPM and baseline (CW, BPSK, 16QAM) baseband waveform generation.

Symbol layout for M-PPM: ``M + 1`` chips of ``T_c = 1/BW``; message ``s`` puts a
rectangular pulse in chip ``s`` (1-based) and the last chip is a silent guard.
Bit groups are read most-significant bit first and are the Gray code of
``s - 1``, so neighbouring pulse positions differ in exactly one bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, PartialSymbol
from .signals import SimSeed, Waveform

__all__ = [
    "PpmConfig",
    "MessageSequence",
    "gray_encode",
    "gray_decode",
    "bits_to_messages",
    "messages_to_bits",
    "modulate_ppm",
    "modulate_baseline",
    "BASELINE_KINDS",
    "QAM16_LEVELS",
    "Modulation",
]

BASELINE_KINDS = ("CW", "BPSK", "QAM16")

# unnormalised 16QAM grid; average |m|^2 of the grid is 10
QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])


def _check_order(m_order: int) -> int:
    m = int(m_order)
    if m < 2 or m & (m - 1):
        raise InvalidConfig("m_order must be a power of two >= 2", m_order=m_order)
    return m


@dataclass(frozen=True)
class Modulation:
    """Waveform family tag: ``CW``, ``BPSK``, ``QAM16`` or ``PPM`` with an order."""

    kind: str
    m_order: int | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in BASELINE_KINDS + ("PPM",):
            raise InvalidConfig(f"unknown modulation {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "PPM":
            object.__setattr__(self, "m_order", _check_order(self.m_order or 0))
        elif self.m_order is not None:
            raise InvalidConfig(f"{kind} takes no order")

    @classmethod
    def parse(cls, text: "str | Modulation") -> "Modulation":
        """Accepts ``CW``, ``BPSK``, ``16QAM``/``QAM16`` and ``4-PPM``/``PPM4``/``ppm:4``."""
        if isinstance(text, Modulation):
            return text
        t = str(text).strip().upper().replace("_", "").replace(" ", "")
        if t in ("16QAM", "QAM16"):
            return cls("QAM16")
        if t in ("CW", "BPSK"):
            return cls(t)
        if "PPM" in t:
            digits = t.replace("PPM", "").strip("-:")
            if digits.isdigit():
                return cls("PPM", int(digits))
        raise InvalidConfig(f"cannot parse modulation {text!r}")

    @property
    def is_ppm(self) -> bool:
        return self.kind == "PPM"

    @property
    def label(self) -> str:
        if self.is_ppm:
            return f"{self.m_order}-PPM"
        return "16QAM" if self.kind == "QAM16" else self.kind

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class PpmConfig:
    m_order: int
    bandwidth_hz: float
    avg_power_w: float = 1.0
    samples_per_chip: int = 16

    def __post_init__(self):
        _check_order(self.m_order)
        if not self.bandwidth_hz > 0:
            raise InvalidConfig("bandwidth_hz must be positive", bandwidth_hz=self.bandwidth_hz)
        if not self.avg_power_w > 0:
            raise InvalidConfig("avg_power_w must be positive", avg_power_w=self.avg_power_w)
        if int(self.samples_per_chip) < 2:
            raise InvalidConfig("samples_per_chip must be >= 2", samples_per_chip=self.samples_per_chip)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.m_order))

    @property
    def chips_per_symbol(self) -> int:
        return self.m_order + 1

    @property
    def chip_duration_s(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def guard_duration_s(self) -> float:
        return self.chip_duration_s

    @property
    def symbol_duration_s(self) -> float:
        return self.chips_per_symbol * self.chip_duration_s

    @property
    def samples_per_symbol(self) -> int:
        return self.chips_per_symbol * self.samples_per_chip

    @property
    def sample_rate_hz(self) -> float:
        return self.samples_per_chip * self.bandwidth_hz

    @property
    def pulse_amplitude(self) -> float:
        """Peak amplitude of the real RF pulse, sqrt(2 (M+1) P)."""
        return math.sqrt(2.0 * self.chips_per_symbol * self.avg_power_w)

    @property
    def baseband_amplitude(self) -> float:
        """Complex-envelope pulse height; the RF peak is sqrt(2) times this."""
        return math.sqrt(self.chips_per_symbol * self.avg_power_w)


@dataclass(frozen=True, eq=False)
class MessageSequence:
    messages: np.ndarray
    m_order: int

    def __post_init__(self):
        m = _check_order(self.m_order)
        msgs = np.array(self.messages, dtype=np.int64, copy=True).reshape(-1)
        if msgs.size and (msgs.min() < 1 or msgs.max() > m):
            raise InvalidConfig("messages must lie in 1..M", m_order=m)
        msgs.flags.writeable = False
        object.__setattr__(self, "messages", msgs)
        object.__setattr__(self, "m_order", m)

    def __len__(self) -> int:
        return self.messages.size


def gray_encode(n):
    n = np.asarray(n, dtype=np.int64)
    return n ^ (n >> 1)


def gray_decode(g):
    g = np.array(g, dtype=np.int64, copy=True)
    shift = g >> 1
    while np.any(shift):
        g ^= shift
        shift >>= 1
    return g


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits).reshape(-1)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise InvalidConfig("bit stream must contain only 0 and 1")
    return arr.astype(np.uint8)


def bits_to_messages(bits, m_order: int) -> MessageSequence:
    m = _check_order(m_order)
    k = int(math.log2(m))
    arr = _as_bits(bits)
    if arr.size % k:
        raise PartialSymbol(f"{arr.size} bits do not split into {k}-bit groups", n_bits=int(arr.size))
    groups = arr.reshape(-1, k).astype(np.int64)
    weights = 1 << np.arange(k - 1, -1, -1)
    codes = groups @ weights
    return MessageSequence(gray_decode(codes) + 1, m)


def messages_to_bits(messages: MessageSequence) -> np.ndarray:
    k = int(math.log2(messages.m_order))
    codes = gray_encode(messages.messages - 1)
    shifts = np.arange(k - 1, -1, -1)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def modulate_ppm(messages: MessageSequence, cfg: PpmConfig) -> Waveform:
    """Rectangular-pulse M-PPM waveform at ``cfg.samples_per_chip`` samples per chip."""
    if messages.m_order != cfg.m_order:
        raise InvalidConfig("message alphabet does not match cfg.m_order",
                            messages_m=messages.m_order, cfg_m=cfg.m_order)
    n = len(messages)
    if n == 0:
        raise InvalidConfig("at least one symbol is required")
    grid = np.zeros((n, cfg.chips_per_symbol, cfg.samples_per_chip), dtype=np.complex128)
    grid[np.arange(n), messages.messages - 1, :] = cfg.baseband_amplitude
    return Waveform(grid.reshape(-1), cfg.sample_rate_hz)


def modulate_baseline(kind: str, n_symbols: int, avg_power_w: float, bandwidth_hz: float,
                      seed: SimSeed, samples_per_symbol: int = 16) -> Waveform:
    """CW, BPSK or 16QAM at symbol rate ``bandwidth_hz`` with rectangular symbols.

    Random constellations are rescaled after drawing so the realised average
    power is exactly ``avg_power_w``.
    """
    kind = kind.upper()
    if kind not in BASELINE_KINDS:
        raise InvalidConfig(f"unknown baseline {kind!r}", choices=list(BASELINE_KINDS))
    if n_symbols < 1:
        raise InvalidConfig("n_symbols must be >= 1", n_symbols=n_symbols)
    if not bandwidth_hz > 0:
        raise InvalidConfig("bandwidth_hz must be positive", bandwidth_hz=bandwidth_hz)

    rng = seed.generator()
    if kind == "CW":
        symbols = np.ones(n_symbols, dtype=np.complex128)
    elif kind == "BPSK":
        symbols = rng.choice(np.array([-1.0, 1.0]), size=n_symbols).astype(np.complex128)
    else:
        i = rng.choice(QAM16_LEVELS, size=n_symbols)
        q = rng.choice(QAM16_LEVELS, size=n_symbols)
        symbols = i + 1j * q
    symbols = symbols / math.sqrt(np.mean(np.abs(symbols) ** 2))
    symbols *= math.sqrt(avg_power_w)
    samples = np.repeat(symbols, int(samples_per_symbol))
    return Waveform(samples, bandwidth_hz * samples_per_symbol)

"""Flat wireless channel: path loss, one complex fading tap, optional power override.

Antenna noise is not modelled; all noise enters at the rectifier output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .signals import SimSeed, Waveform, dbm_to_watt

__all__ = ["ChannelParams", "apply_channel", "sample_fading", "FADING_MODELS",
           "free_space_path_loss"]

FADING_MODELS = ("fixed", "rayleigh_block")
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ChannelParams:
    path_loss_linear: float = 1.0
    fading_coeff: complex = 1.0 + 0.0j
    rx_power_dbm_override: float | None = None

    def __post_init__(self):
        if not self.path_loss_linear >= 1.0:
            raise InvalidConfig("path loss must be >= 1 (linear power ratio)",
                                path_loss_linear=self.path_loss_linear)
        if not np.isfinite(abs(complex(self.fading_coeff))):
            raise InvalidConfig("fading coefficient must be finite")

    @property
    def amplitude_gain(self) -> complex:
        return complex(self.fading_coeff) / math.sqrt(self.path_loss_linear)


def apply_channel(tx: Waveform, params: ChannelParams) -> Waveform:
    rx = tx.samples * params.amplitude_gain
    if params.rx_power_dbm_override is not None:
        power = float(np.mean(np.abs(rx) ** 2))
        if power <= 0:
            raise InvalidConfig("cannot rescale a zero-power signal to the override power")
        rx = rx * math.sqrt(dbm_to_watt(params.rx_power_dbm_override) / power)
    return Waveform(rx, tx.sample_rate_hz)


def sample_fading(model: str, seed: SimSeed, n_blocks: int | None = None):
    """Block fading coefficient(s); ``n_blocks=None`` returns a single complex.

    ``rayleigh_block`` draws h ~ CN(0, 1); the first entry of an ``n_blocks``
    draw equals the single draw for the same seed.
    """
    model = model.lower()
    if model not in FADING_MODELS:
        raise InvalidConfig(f"unknown fading model {model!r}", choices=list(FADING_MODELS))
    count = 1 if n_blocks is None else int(n_blocks)
    if model == "fixed":
        h = np.ones(count, dtype=np.complex128)
    else:
        rng = seed.generator()
        z = rng.standard_normal((count, 2))
        h = (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)
    return complex(h[0]) if n_blocks is None else h


def free_space_path_loss(distance_m: float, carrier_hz: float = 2.45e9) -> float:
    """Friis loss with unity antenna gains, floored at 1."""
    wavelength = SPEED_OF_LIGHT / carrier_hz
    return max(1.0, (4.0 * math.pi * distance_m / wavelength) ** 2)

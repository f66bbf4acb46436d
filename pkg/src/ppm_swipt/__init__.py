"""M-ary pulse position modulation for simultaneous wireless information and power transfer.

Monte Carlo simulator of a PPM link whose receiver reuses the energy
harvester's rectified output as the information signal.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("ppm-swipt")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .channel import ChannelParams, apply_channel, free_space_path_loss, sample_fading
from .errors import SimulationError
from .link import LinkRun, PpmLink, settled_rectify
from .metrics import (
    OperatingPoint,
    SweepResult,
    ber,
    effective_throughput,
    empirical_cdf,
    gain_over_cw,
    throughput,
    wilson_interval,
)
from .modulator import (
    MessageSequence,
    Modulation,
    PpmConfig,
    bits_to_messages,
    gray_decode,
    gray_encode,
    messages_to_bits,
    modulate_baseline,
    modulate_ppm,
)
from .receiver import DemodConfig, adc_sample, decode_symbol, demodulate, moving_average
from .rectifier import (
    RectifierParams,
    RectNoiseParams,
    TaylorModelParams,
    add_rect_noise,
    fundamental_ripple,
    harvested_power_behavioral,
    harvested_power_taylor,
    load_rectifier_preset,
    rectify_envelope,
)
from .signals import RealTrace, SimSeed, Waveform, dbm_to_watt, mean_square, papr, watt_to_dbm

__all__ = [
    "__version__",
    "ChannelParams",
    "apply_channel",
    "free_space_path_loss",
    "sample_fading",
    "SimulationError",
    "LinkRun",
    "PpmLink",
    "settled_rectify",
    "OperatingPoint",
    "SweepResult",
    "ber",
    "effective_throughput",
    "empirical_cdf",
    "gain_over_cw",
    "throughput",
    "wilson_interval",
    "MessageSequence",
    "Modulation",
    "PpmConfig",
    "bits_to_messages",
    "gray_decode",
    "gray_encode",
    "messages_to_bits",
    "modulate_baseline",
    "modulate_ppm",
    "DemodConfig",
    "adc_sample",
    "decode_symbol",
    "demodulate",
    "moving_average",
    "RectifierParams",
    "RectNoiseParams",
    "TaylorModelParams",
    "add_rect_noise",
    "fundamental_ripple",
    "harvested_power_behavioral",
    "harvested_power_taylor",
    "load_rectifier_preset",
    "rectify_envelope",
    "RealTrace",
    "SimSeed",
    "Waveform",
    "dbm_to_watt",
    "mean_square",
    "papr",
    "watt_to_dbm",
]

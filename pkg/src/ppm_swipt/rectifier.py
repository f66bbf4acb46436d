"""Energy-harvester models.

Two views of the same single-diode rectifier:

* a truncated Taylor model of the diode giving the average delivered power
  from the second and fourth moments of the received envelope, and
* a behavioural envelope-detector ODE producing a time-domain output voltage
  ``v_DC(t)`` whose charge/discharge ripple carries the PPM information.

The ODE is

    C_out dv/dt = i_d(t, v) - v / R_load

with the diode current quasi-static over one RF cycle. In the default
``carrier_average`` drive the Shockley current is averaged over the carrier
phase, which for an RF peak voltage ``a`` gives ``i_s (I0(a/nVt) e^{-v/nVt} - 1)``;
``peak`` drive applies Shockley directly to ``a - v``. The series resistance
enters through the implicit drop ``i r_s`` on the averaged current.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numba
import numpy as np
import yaml
from scipy.optimize import brentq
from scipy.special import i0e

from .errors import IntegratorDiverged, InvalidConfig, NoDcComponent, UnknownPreset
from .modulator import Modulation
from .signals import RealTrace, SimSeed, Waveform, mean_square

__all__ = [
    "TaylorModelParams",
    "RectifierParams",
    "RectNoiseParams",
    "RippleStats",
    "DRIVE_MODES",
    "harvested_power_taylor",
    "harvested_power_behavioral",
    "scaling_law_coefficient",
    "taylor_scaling_power",
    "fourth_moment",
    "rectify_envelope",
    "integrate_drive",
    "steady_state_voltage",
    "calibrate_matching_gain",
    "fundamental_ripple",
    "add_rect_noise",
    "noise_sigma",
    "load_rectifier_preset",
    "rectifier_presets",
]

DRIVE_MODES = ("carrier_average", "peak")
EXPONENT_GUARD = 100.0


@dataclass(frozen=True)
class TaylorModelParams:
    k2: float = 0.0034
    k4: float = 0.3829
    r_ant: float = 50.0

    def __post_init__(self):
        for name in ("k2", "k4", "r_ant"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"{name} must be positive")


@dataclass(frozen=True)
class RectifierParams:
    i_s: float = 5e-6
    ideality_n: float = 1.05
    v_t: float = 0.02585
    r_s: float = 20.0
    c_out: float = 1e-9
    r_load: float = 10e3
    matching_gain: float = 1.0
    r_ant: float = 50.0
    drive: str = "carrier_average"

    def __post_init__(self):
        for name in ("i_s", "ideality_n", "v_t", "c_out", "r_load", "matching_gain", "r_ant"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"{name} must be strictly positive", **{name: getattr(self, name)})
        if not self.r_s >= 0:
            raise InvalidConfig("r_s must be non-negative")
        if self.drive not in DRIVE_MODES:
            raise InvalidConfig(f"unknown drive {self.drive!r}", choices=list(DRIVE_MODES))

    @property
    def n_vt(self) -> float:
        return self.ideality_n * self.v_t

    @property
    def time_constant_s(self) -> float:
        return self.r_load * self.c_out

    def envelope_voltage(self, samples) -> np.ndarray:
        """RF peak voltage at the diode for complex-envelope samples in sqrt(W)."""
        return self.matching_gain * math.sqrt(2.0 * self.r_ant) * np.abs(samples)

    def drive_exponent(self, envelope_v) -> np.ndarray:
        x = np.asarray(envelope_v, dtype=np.float64) / self.n_vt
        if self.drive == "peak":
            return x
        # ln I0(x) without overflow
        return np.log(i0e(x)) + x

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RectNoiseParams:
    """Rectifier output noise; set exactly one of ``snr_db`` or ``sigma_v``.

    SNR is mean_square(v_DC) / sigma^2, i.e. referenced to the total noiseless
    output power including its DC part. ``snr_db = inf`` disables noise.
    """

    snr_db: float | None = None
    sigma_v: float | None = None

    def __post_init__(self):
        if (self.snr_db is None) == (self.sigma_v is None):
            raise InvalidConfig("set exactly one of snr_db or sigma_v")
        if self.sigma_v is not None and not self.sigma_v >= 0:
            raise InvalidConfig("sigma_v must be non-negative")

    @property
    def label(self) -> str:
        return f"snr={self.snr_db:g}dB" if self.snr_db is not None else f"sigma={self.sigma_v:g}V"


class RippleStats(NamedTuple):
    peak_to_peak: float
    ripple_factor: float
    mean: float


# --------------------------------------------------------------------------- presets

@lru_cache(maxsize=None)
def _preset_table() -> dict:
    text = resources.files("ppm_swipt").joinpath("data/rectifiers.yaml").read_text()
    return yaml.safe_load(text)


def rectifier_presets() -> dict[str, RectifierParams]:
    return {name: RectifierParams(**vals) for name, vals in _preset_table().items()}


def load_rectifier_preset(name_or_path: str, **overrides) -> RectifierParams:
    """Resolve ``rect1``/``rect2`` or a YAML file holding one parameter mapping."""
    table = _preset_table()
    if name_or_path in table:
        values = dict(table[name_or_path])
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise UnknownPreset(f"unknown rectifier preset {name_or_path!r}", available=sorted(table))
        values = yaml.safe_load(path.read_text())
    values.update(overrides)
    return RectifierParams(**values)


# --------------------------------------------------------------------------- Taylor model

def harvested_power_taylor(rx: Waveform, p: TaylorModelParams = TaylorModelParams()) -> float:
    """k2 R E|x|^2 + 1.5 k4 R^2 E|x|^4 for a complex-envelope waveform in sqrt(W)."""
    power = np.abs(rx.samples) ** 2
    return float(p.k2 * p.r_ant * np.mean(power) + 1.5 * p.k4 * p.r_ant**2 * np.mean(power**2))


def fourth_moment(kind) -> Fraction:
    """Exact E|m|^4 of the unit-average-power symbol alphabet, by enumeration."""
    mod = Modulation.parse(kind)
    if mod.kind in ("CW", "BPSK"):
        # |m|^2 = 1 for every point
        return Fraction(1)
    if mod.kind == "QAM16":
        pts = [(i, q) for i in (-3, -1, 1, 3) for q in (-3, -1, 1, 3)]
        energies = [i * i + q * q for i, q in pts]
        avg = Fraction(sum(energies), len(energies))
        return sum(Fraction(e) ** 2 for e in energies) / len(energies) / avg**2
    # each symbol is M+1 chips with one chip at |m|^2 = M+1 and the rest zero
    m = mod.m_order
    chips = m + 1
    total = Fraction(0)
    for s in range(m):
        chip_power = [Fraction(chips) if c == s else Fraction(0) for c in range(chips)]
        total += sum(e**2 for e in chip_power) / chips
    return total / m


def scaling_law_coefficient(kind) -> float:
    """Fourth-order coefficient c in P_del = k2 R P + c k4 R^2 P^2."""
    return float(Fraction(3, 2) * fourth_moment(kind))


def taylor_scaling_power(kind, avg_power_w: float, p: TaylorModelParams = TaylorModelParams()) -> float:
    """Ensemble-average Taylor output k2 R P + c k4 R^2 P^2 for a modulation at power P."""
    if not avg_power_w >= 0:
        raise InvalidConfig("average power must be non-negative")
    return p.k2 * p.r_ant * avg_power_w + scaling_law_coefficient(kind) * p.k4 * p.r_ant**2 * avg_power_w**2


# --------------------------------------------------------------------------- behavioural ODE

@numba.njit(cache=True)
def _diode(drive, v, i_s, nvt, r_s, guard):
    """Averaged diode current and its conductance -di/dv at output voltage ``v``."""
    x = drive - v / nvt
    e = math.exp(min(x, guard))
    g0 = i_s * e / nvt
    if r_s == 0.0:
        return i_s * (e - 1.0), g0
    # i = i_s (e^x exp(-c i) - 1) with c = r_s / nVt; expanding exp(-c i) to
    # second order gives a quadratic whose small root is accurate to (c i)^3 / 6
    c = r_s / nvt
    i0 = i_s * (e - 1.0)
    b = 1.0 + r_s * g0
    disc = b * b - 2.0 * i_s * e * c * c * i0
    i = 2.0 * i0 / (b + math.sqrt(max(disc, 0.0)))
    gd = g0
    if abs(i) * c > 1e-2:
        for _ in range(80):
            ee = math.exp(min(x - i * c, guard))
            gd = i_s * ee / nvt
            step = (i - i_s * (ee - 1.0)) / (1.0 + r_s * gd)
            i -= step
            if abs(step) <= 1e-13 * (abs(i) + i_s):
                break
    else:
        gd = g0 * (1.0 - c * i)
    return i, gd / (1.0 + r_s * gd)


@numba.njit(cache=True)
def _integrate(drive, dt, n_sub, c_out, r_load, i_s, nvt, r_s, v0, guard, out):
    v = v0
    h = dt / n_sub
    g_load = 1.0 / r_load
    for k in range(drive.size):
        a = drive[k]
        for _ in range(n_sub):
            i, gd = _diode(a, v, i_s, nvt, r_s, guard)
            rate = (gd + g_load) / c_out
            if rate * h <= 1.0:
                v += (i - v * g_load) / c_out * (-math.expm1(-rate * h)) / rate
            else:
                # refine strongly forward-biased steps
                m = min(int(math.ceil(rate * h)), 256)
                hh = h / m
                for _ in range(m):
                    i, gd = _diode(a, v, i_s, nvt, r_s, guard)
                    rate = (gd + g_load) / c_out
                    v += (i - v * g_load) / c_out * (-math.expm1(-rate * hh)) / rate
        if not math.isfinite(v):
            return k, v
        out[k] = v
    return -1, v


def integrate_drive(drive: np.ndarray, sample_rate_hz: float, p: RectifierParams,
                    dt_max: float | None = None, v0: float = 0.0) -> np.ndarray:
    """Run the rectifier ODE on a precomputed drive exponent (see ``drive_exponent``)."""
    if dt_max is None:
        dt_max = p.time_constant_s / 100.0
    if not dt_max > 0:
        raise InvalidConfig("dt_max must be positive")
    drive = np.ascontiguousarray(drive, dtype=np.float64)
    bad_input = np.flatnonzero(~np.isfinite(drive))
    if bad_input.size:
        raise IntegratorDiverged("non-finite rectifier drive", step_index=int(bad_input[0]))
    dt = 1.0 / sample_rate_hz
    n_sub = max(1, math.ceil(dt / dt_max * (1.0 - 1e-12)))
    out = np.empty(drive.size)
    bad, _ = _integrate(drive, dt, n_sub, p.c_out,
                        p.r_load, p.i_s, p.n_vt, p.r_s, float(v0), EXPONENT_GUARD, out)
    if bad >= 0:
        raise IntegratorDiverged("non-finite rectifier state", step_index=int(bad))
    return out


def rectify_envelope(rx: Waveform, p: RectifierParams, dt_max: float | None = None,
                     v0: float = 0.0) -> RealTrace:
    """Integrate the rectifier ODE over ``rx`` (zero-order hold of its envelope).

    Sample ``k`` of the result is the capacitor voltage at the end of input
    sample interval ``k``. Each input interval is split into equal sub-steps
    no longer than ``dt_max`` (default ``R_load C_out / 100``) and further
    refined while the diode conducts hard. Steps use exponential Euler on the
    local linearisation, which is exact for the linear RC discharge.
    """
    drive = p.drive_exponent(p.envelope_voltage(rx.samples))
    return RealTrace(integrate_drive(drive, rx.sample_rate_hz, p, dt_max, v0), rx.sample_rate_hz)


def diode_current(envelope_v: float, v: float, p: RectifierParams) -> float:
    drive = float(p.drive_exponent(envelope_v))
    i, _ = _diode(drive, float(v), p.i_s, p.n_vt, p.r_s, EXPONENT_GUARD)
    return float(i)


def steady_state_voltage(envelope_v: float, p: RectifierParams) -> float:
    """Output voltage where the diode current balances the load for a constant envelope."""
    if envelope_v <= 0:
        return 0.0

    def balance(v):
        return diode_current(envelope_v, v, p) - v / p.r_load

    if balance(0.0) <= 0.0:
        # diode current underflows at vanishing drive
        return 0.0
    hi = max(envelope_v, p.n_vt)
    return float(brentq(balance, 0.0, hi, xtol=1e-15, rtol=1e-13))


def calibrate_matching_gain(p: RectifierParams, target_vdc: float, rx_power_w: float) -> RectifierParams:
    """Return ``p`` with ``matching_gain`` chosen so CW at ``rx_power_w`` settles to ``target_vdc``."""
    if not target_vdc > 0 or not rx_power_w > 0:
        raise InvalidConfig("target voltage and power must be positive")
    base = math.sqrt(2.0 * p.r_ant * rx_power_w)

    def miss(log_gain):
        q = replace(p, matching_gain=math.exp(log_gain))
        return steady_state_voltage(q.matching_gain * base, q) - target_vdc

    lo, hi = -20.0, 20.0
    if miss(lo) > 0 or miss(hi) < 0:
        raise InvalidConfig("target voltage not reachable by scaling the matching gain")
    return replace(p, matching_gain=math.exp(brentq(miss, lo, hi, xtol=1e-12)))


def harvested_power_behavioral(v_dc: RealTrace, p: RectifierParams) -> float:
    """Average power into the load, mean(v^2)/R_load (no leakage to the decoder)."""
    return mean_square(v_dc) / p.r_load


# --------------------------------------------------------------------------- ripple and noise

def fundamental_ripple(v_dc: RealTrace, transient_skip: float = 0.0) -> RippleStats:
    skip = int(round(transient_skip * v_dc.sample_rate_hz))
    if skip >= len(v_dc) - 1:
        raise InvalidConfig("trace shorter than the transient skip", skip_samples=skip, n=len(v_dc))
    v = v_dc.samples[skip:]
    mean = float(np.mean(v))
    if mean <= 0:
        raise NoDcComponent("ripple factor undefined for a non-positive mean", mean=mean)
    ac_rms = float(np.sqrt(np.mean((v - mean) ** 2)))
    return RippleStats(float(v.max() - v.min()), ac_rms / mean, mean)


def noise_sigma(noise: RectNoiseParams, reference_ms: float) -> float:
    if noise.sigma_v is not None:
        return float(noise.sigma_v)
    if math.isinf(noise.snr_db) and noise.snr_db > 0:
        return 0.0
    if not reference_ms > 0:
        raise InvalidConfig("SNR-referenced noise needs a trace with positive mean square")
    return math.sqrt(reference_ms / 10.0 ** (noise.snr_db / 10.0))


def add_rect_noise(v_dc: RealTrace, noise: RectNoiseParams, seed: SimSeed,
                   reference_ms: float | None = None) -> RealTrace:
    """y = v_DC + white Gaussian noise.

    ``reference_ms`` overrides the mean square used for the SNR reference, so a
    trace segment can be noised consistently with a longer run.
    """
    ref = mean_square(v_dc) if reference_ms is None else reference_ms
    sigma = noise_sigma(noise, ref)
    if sigma == 0.0:
        return v_dc
    z = seed.generator().standard_normal(len(v_dc))
    return RealTrace(v_dc.samples + sigma * z, v_dc.sample_rate_hz)

"""Named experiment presets and the sweep runners behind the command line.

Each runner returns a :class:`SweepTable`; writing CSV (and optionally SVG)
is separate so tables can be inspected in tests without touching disk.
Every grid point draws from its own keyed RNG sub-stream. The key depends on
the message-generating parameters only (M, received power), so points that
differ only in bandwidth or rectifier see the same bits and the same noise
sequence: comparisons across those axes use common random numbers.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .channel import ChannelParams, apply_channel, sample_fading
from .errors import InvalidConfig, MissingSeed, UnknownPreset
from .link import PpmLink, random_messages, settled_rectify
from .metrics import (
    OperatingPoint,
    SweepResult,
    effective_throughput,
    empirical_cdf,
    gain_over_cw,
    throughput,
)
from .modulator import MessageSequence, Modulation, messages_to_bits, modulate_baseline
from .rectifier import (
    RectNoiseParams,
    TaylorModelParams,
    fundamental_ripple,
    harvested_power_behavioral,
    load_rectifier_preset,
    taylor_scaling_power,
)
from .signals import SimSeed, dbm_to_watt

__all__ = [
    "ExperimentConfig",
    "SweepTable",
    "PRESETS",
    "COMMANDS",
    "SNR_DEFINITION",
    "resolve_config",
    "parse_range",
    "run_ber_sweep",
    "run_power_sweep",
    "run_ripple",
    "dump_waveform",
    "run_cdf",
    "run_experiment",
    "write_outputs",
]

COMMANDS = ("ber-sweep", "power-sweep", "ripple", "waveform", "cdf")

SNR_DEFINITION = ("SNR = mean_square(noiseless v_DC over the data symbols) / sigma^2, "
                  "sigma = std of the white Gaussian noise added per ADC sample")

_FIG_BW = [1e6, 2e6, 5e6, 10e6]
_ALL_MODS = ["CW", "BPSK", "16QAM", "2-PPM", "4-PPM", "8-PPM"]

PRESETS: dict[str, dict] = {
    "fig5": dict(command="waveform", m_orders=[4], bandwidths_hz=[5e6], rects=["rect1"],
                 snr_db=[20.0], adc_rate_hz=1e9, messages=[2],
                 description="single 4-PPM symbol s=2, 5 MHz, SNR 20 dB, 1 GS/s ADC"),
    "fig6": dict(command="waveform", m_orders=[4], bandwidths_hz=_FIG_BW, rects=["rect1", "rect2"],
                 snr_db=[], n_symbols=4,
                 description="noiseless 4-PPM v_DC ripple versus bandwidth and C_out"),
    "fig7": dict(command="ber-sweep", m_orders=[2, 4, 8], bandwidths_hz=[5e6],
                 rects=["rect1", "rect2"], snr_db="0:40:2", n_symbols=2000,
                 description="BER vs SNR, M = 2/4/8 at 5 MHz"),
    "fig8": dict(command="ber-sweep", m_orders=[4], bandwidths_hz=_FIG_BW,
                 rects=["rect1", "rect2"], snr_db="0:40:2", n_symbols=2000,
                 description="BER vs SNR, 4-PPM at 1/2/5/10 MHz"),
    "fig10": dict(command="ripple", m_orders=[2, 4, 8], bandwidths_hz=_FIG_BW,
                  rects=["rect1", "rect2"], n_symbols=200,
                  description="noiseless ripple factor vs M and bandwidth at -20 dBm"),
    "fig11": dict(command="power-sweep", modulations=_ALL_MODS, bandwidths_hz=[5e6],
                  rects=["rect1"], rx_power_dbm=[-20.0], n_symbols=1000,
                  description="harvested power of PPM and baselines at -20 dBm, C_out = 1 nF"),
    "fig12": dict(command="ripple", m_orders=[2, 4, 8], bandwidths_hz=_FIG_BW,
                  rects=["rect1", "rect2"], rx_power_dbm=[-17.0], n_symbols=200,
                  description="ripple factor vs M and bandwidth at -17 dBm"),
    "fig13": dict(command="ber-sweep", m_orders=[2, 4, 8], bandwidths_hz=[5e6],
                  rects=["rect1", "rect2"], rx_power_dbm="-30:-5:2.5", snr_db=None,
                  sigma_v=1e-3, n_symbols=1000,
                  description="BER vs received power at fixed rectifier noise, M = 2/4/8"),
    "fig14": dict(command="ber-sweep", m_orders=[4], bandwidths_hz=_FIG_BW,
                  rects=["rect1", "rect2"], rx_power_dbm="-30:-5:2.5", snr_db=None,
                  sigma_v=1e-3, n_symbols=1000,
                  description="BER vs received power at fixed rectifier noise, 4-PPM bandwidths"),
    "fig15": dict(command="power-sweep", modulations=["2-PPM", "4-PPM", "8-PPM"],
                  bandwidths_hz=[5e6], rects=["rect1", "rect2"], rx_power_dbm="-30:-5:2.5",
                  n_symbols=500,
                  description="harvested power vs received power, M = 2/4/8 at 5 MHz"),
    "fig16": dict(command="power-sweep", modulations=["4-PPM"], bandwidths_hz=_FIG_BW,
                  rects=["rect1", "rect2"], rx_power_dbm="-30:-5:2.5", n_symbols=500,
                  description="harvested power vs received power, 4-PPM bandwidths"),
    "fig17": dict(command="power-sweep", modulations=_ALL_MODS, bandwidths_hz=[5e6],
                  rects=["rect1"], rx_power_dbm=[-17.0], n_symbols=1000,
                  description="harvested power of PPM and baselines at -17 dBm"),
    "fig18": dict(command="cdf", modulations=_ALL_MODS, bandwidths_hz=[5e6], rects=["rect1"],
                  rx_power_dbm=[-20.0], n_draws=50, n_symbols=200,
                  description="CDF of harvested power over 50 Rayleigh block-fading draws"),
}


def parse_range(value) -> list[float]:
    """``"a:b:step"`` (inclusive), a scalar, or a list -> list of floats."""
    if value is None:
        return []
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        if ":" in value:
            parts = [float(p) for p in value.split(":")]
            if len(parts) != 3 or parts[2] == 0:
                raise InvalidConfig(f"range must be start:stop:step, got {value!r}")
            start, stop, step = parts
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 10) for k in range(max(n, 0))]
        return [float(p) for p in value.replace(",", " ").split()]
    return [float(v) for v in value]


@dataclass
class ExperimentConfig:
    command: str
    preset: str | None = None
    m_orders: list[int] = field(default_factory=lambda: [4])
    bandwidths_hz: list[float] = field(default_factory=lambda: [5e6])
    rects: list[str] = field(default_factory=lambda: ["rect1"])
    snr_db: list[float] | None = None
    sigma_v: float | None = None
    rx_power_dbm: list[float] = field(default_factory=lambda: [-20.0])
    modulations: list[str] = field(default_factory=lambda: list(_ALL_MODS))
    n_symbols: int = 1000
    n_draws: int = 50
    messages: list[int] | None = None
    seed: int | None = None
    adc_rate_hz: float = 2e9
    adc_bits: int | None = None
    adc_full_scale_v: float = 1.0
    tx_power_dbm: float = 27.0
    settling_rows: int = 1
    workers: int = 1
    output_dir: str = "results"
    name: str | None = None
    plot: bool = False
    description: str = ""

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidConfig(f"unknown command {self.command!r}", choices=list(COMMANDS))
        self.m_orders = [int(m) for m in self.m_orders]
        self.bandwidths_hz = parse_range(self.bandwidths_hz)
        self.rx_power_dbm = parse_range(self.rx_power_dbm)
        self.snr_db = None if self.snr_db is None else parse_range(self.snr_db)
        self.modulations = [Modulation.parse(m).label for m in self.modulations]
        self.rects = [str(r) for r in self.rects]
        if self.seed is None:
            raise MissingSeed("a seed is required (--seed or 'seed' in the config file)")
        self.seed = int(self.seed)
        if self.n_symbols < 1:
            raise InvalidConfig("n_symbols must be >= 1")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")

    @property
    def output_name(self) -> str:
        return self.name or self.preset or self.command

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for key in ("workers", "output_dir", "plot"):
            d.pop(key)
        return d


def resolve_config(command: str, preset: str | None = None, file_values: dict | None = None,
                   overrides: dict | None = None) -> ExperimentConfig:
    """Merge preset defaults < config file < explicit overrides."""
    values: dict = {}
    file_values = dict(file_values or {})
    preset = overrides.get("preset") if overrides and overrides.get("preset") else (
        preset or file_values.pop("preset", None))
    file_values.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise UnknownPreset(f"unknown preset {preset!r}", available=sorted(PRESETS))
        values.update(PRESETS[preset])
        if values["command"] != command:
            raise InvalidConfig(f"preset {preset!r} belongs to '{values['command']}', not '{command}'",
                                available=[p for p, v in PRESETS.items() if v["command"] == command])
    values.update(file_values)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None and k != "preset"})
    values["command"] = command
    values["preset"] = preset
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise InvalidConfig(f"unknown configuration keys: {', '.join(unknown)}")
    return ExperimentConfig(**values)


def load_config_file(path: str | Path) -> dict:
    data = yaml.safe_load(Path(path).read_text())
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidConfig("config file must hold a mapping")
    return data


# --------------------------------------------------------------------------- tables

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@dataclass
class SweepTable:
    name: str
    columns: list[str]
    rows: list[dict]
    manifest: dict
    summary: dict = field(default_factory=dict)
    extra_tables: dict = field(default_factory=dict)

    def body(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def header_block(self) -> str:
        lines = []
        for key, value in list(self.manifest.items()) + [("summary", self.summary)]:
            lines.append(f"# {key}: {json.dumps(value, sort_keys=True, default=_fmt)}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.header_block() + self.body())
        return path

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]


def _manifest(cfg: ExperimentConfig, units: dict) -> dict:
    return {
        "tool": "ppm-swipt",
        "version": __version__,
        "command": cfg.command,
        "preset": cfg.preset,
        "seed": cfg.seed,
        "snr_definition": SNR_DEFINITION,
        "units": units,
        "config": cfg.to_dict(),
    }


def stream_key(*parts) -> int:
    """Stable 63-bit key for a tuple of grid coordinates."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def _pmap(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _require_grid(**axes):
    empty = [name for name, values in axes.items() if not values]
    if empty:
        raise InvalidConfig(f"empty grid along: {', '.join(empty)}")


# --------------------------------------------------------------------------- BER sweep

BER_COLUMNS = ["m_order", "bandwidth_hz", "rect_preset", "rx_power_dbm", "snr_db", "sigma_v",
               "n_symbols", "seed", "ber", "ber_ci95_lo", "ber_ci95_hi", "n_bit_errors", "n_bits",
               "throughput_bps", "effective_throughput_bps", "p_del_w", "ripple_factor"]
BER_UNITS = {"bandwidth_hz": "Hz", "rx_power_dbm": "dBm", "snr_db": "dB", "sigma_v": "V",
             "throughput_bps": "bit/s", "effective_throughput_bps": "bit/s", "p_del_w": "W",
             "ber": "1", "ripple_factor": "1"}


def _ber_task(task) -> list[dict]:
    cfg, m, bw, rect_name, rx_dbm = task
    rect = load_rectifier_preset(rect_name)
    seed = SimSeed(cfg.seed, stream_key("link", m, round(rx_dbm * 1000)))
    link = PpmLink(m, bw, rect, ChannelParams(rx_power_dbm_override=rx_dbm), cfg.adc_rate_hz,
                   cfg.adc_bits, cfg.adc_full_scale_v)
    bits, msgs = random_messages(m, cfg.n_symbols, seed)
    if cfg.sigma_v is not None:
        noises = [RectNoiseParams(sigma_v=cfg.sigma_v)]
    else:
        noises = [RectNoiseParams(snr_db=s) for s in cfg.snr_db]
    run = link.run(msgs, noises, seed, tx_bits=bits)
    rows = []
    for out in run.outcomes:
        point = OperatingPoint(m, bw, rect_name, cfg.n_symbols, cfg.seed, snr_db=out.noise.snr_db,
                               rx_power_dbm=rx_dbm, sigma_v=out.sigma_v)
        res = SweepResult(point, out.ber.ber, out.ber.ci95, out.ber.n_errors, out.ber.n_bits,
                          throughput(m, bw), effective_throughput(m, bw, out.ber.ber),
                          run.p_del_w, run.ripple.ripple_factor)
        rows.append(res.as_row())
    return rows


def run_ber_sweep(cfg: ExperimentConfig) -> SweepTable:
    if cfg.sigma_v is None:
        _require_grid(m_orders=cfg.m_orders, bandwidths_hz=cfg.bandwidths_hz, rects=cfg.rects,
                      rx_power_dbm=cfg.rx_power_dbm, snr_db=cfg.snr_db)
    else:
        _require_grid(m_orders=cfg.m_orders, bandwidths_hz=cfg.bandwidths_hz, rects=cfg.rects,
                      rx_power_dbm=cfg.rx_power_dbm)
    if cfg.n_symbols < 100:
        raise InvalidConfig("BER sweeps need at least 100 symbols per point")
    tasks = [(cfg, m, bw, r, p) for m, bw, r, p in
             itertools.product(cfg.m_orders, cfg.bandwidths_hz, cfg.rects, cfg.rx_power_dbm)]
    rows = [row for rows in _pmap(_ber_task, tasks, cfg.workers) for row in rows]
    return SweepTable(cfg.output_name, BER_COLUMNS, rows, _manifest(cfg, BER_UNITS))


# --------------------------------------------------------------------------- power sweep

POWER_COLUMNS = ["modulation", "bandwidth_hz", "rect_preset", "rx_power_dbm", "n_symbols", "seed",
                 "p_del_taylor_w", "gain_over_cw_taylor_pct", "p_del_behavioral_w",
                 "gain_over_cw_behavioral_pct", "ripple_factor", "mean_vdc_v"]
POWER_UNITS = {"bandwidth_hz": "Hz", "rx_power_dbm": "dBm", "p_del_taylor_w": "W",
               "p_del_behavioral_w": "W", "gain_over_cw_taylor_pct": "%",
               "gain_over_cw_behavioral_pct": "%", "ripple_factor": "1", "mean_vdc_v": "V"}


def harvest_one(mod: Modulation, bw: float, rect_name: str, channel: ChannelParams,
                tx_power_w: float, n_symbols: int, seed: SimSeed, adc_rate_hz: float) -> dict:
    """Taylor and behavioural harvested power for one modulation at one channel state."""
    rect = load_rectifier_preset(rect_name)
    rx_power_w = tx_power_w * abs(channel.amplitude_gain) ** 2
    if channel.rx_power_dbm_override is not None:
        rx_power_w = dbm_to_watt(channel.rx_power_dbm_override)
    # Taylor column is the ensemble expectation; the behavioural one is simulated
    p_taylor = taylor_scaling_power(mod.label, rx_power_w, TaylorModelParams(r_ant=rect.r_ant))
    if mod.is_ppm:
        link = PpmLink(mod.m_order, bw, rect, channel, adc_rate_hz, tx_power_w=tx_power_w)
        _, msgs = random_messages(mod.m_order, n_symbols, seed)
        stats = link.noiseless_stats(msgs)
        ripple = stats.ripple()
        p_beh = stats.mean_square / rect.r_load
    else:
        sps = int(round(adc_rate_hz / bw))
        tx = modulate_baseline(mod.kind, n_symbols, tx_power_w, bw,
                               seed.substream(stream_key("baseline", mod.kind, seed.stream_id)),
                               samples_per_symbol=sps)
        rx = apply_channel(tx, channel)
        v = settled_rectify(rx, rect, sps)
        ripple = fundamental_ripple(v)
        p_beh = harvested_power_behavioral(v, rect)
    return {"p_del_taylor_w": p_taylor, "p_del_behavioral_w": p_beh,
            "ripple_factor": ripple.ripple_factor, "mean_vdc_v": ripple.mean}


def _power_task(task) -> list[dict]:
    cfg, bw, rect_name, rx_dbm = task
    seed = SimSeed(cfg.seed, stream_key("power", round(rx_dbm * 1000)))
    channel = ChannelParams(rx_power_dbm_override=rx_dbm)
    tx_w = dbm_to_watt(rx_dbm)
    mods = [Modulation.parse(m) for m in cfg.modulations]
    cw = Modulation("CW")
    results = {m.label: harvest_one(m, bw, rect_name, channel, tx_w, cfg.n_symbols, seed,
                                    cfg.adc_rate_hz) for m in [cw] + [m for m in mods if m != cw]}
    ref = results["CW"]
    rows = []
    for m in mods:
        r = results[m.label]
        rows.append(dict(modulation=m.label, bandwidth_hz=bw, rect_preset=rect_name,
                         rx_power_dbm=rx_dbm, n_symbols=cfg.n_symbols, seed=cfg.seed, **r,
                         gain_over_cw_taylor_pct=gain_over_cw(r["p_del_taylor_w"], ref["p_del_taylor_w"]),
                         gain_over_cw_behavioral_pct=gain_over_cw(r["p_del_behavioral_w"],
                                                                  ref["p_del_behavioral_w"])))
    return rows


def run_power_sweep(cfg: ExperimentConfig) -> SweepTable:
    _require_grid(modulations=cfg.modulations, bandwidths_hz=cfg.bandwidths_hz, rects=cfg.rects,
                  rx_power_dbm=cfg.rx_power_dbm)
    tasks = [(cfg, bw, r, p) for bw, r, p in
             itertools.product(cfg.bandwidths_hz, cfg.rects, cfg.rx_power_dbm)]
    rows = [row for rows in _pmap(_power_task, tasks, cfg.workers) for row in rows]
    return SweepTable(cfg.output_name, POWER_COLUMNS, rows, _manifest(cfg, POWER_UNITS))


# --------------------------------------------------------------------------- ripple

RIPPLE_COLUMNS = ["m_order", "bandwidth_hz", "rect_preset", "rx_power_dbm", "n_symbols", "seed",
                  "ripple_factor", "peak_to_peak_v", "mean_vdc_v", "p_del_w"]
RIPPLE_UNITS = {"bandwidth_hz": "Hz", "rx_power_dbm": "dBm", "ripple_factor": "1",
                "peak_to_peak_v": "V", "mean_vdc_v": "V", "p_del_w": "W"}


def _ripple_task(task) -> dict:
    cfg, m, bw, rect_name, rx_dbm = task
    rect = load_rectifier_preset(rect_name)
    seed = SimSeed(cfg.seed, stream_key("link", m, round(rx_dbm * 1000)))
    link = PpmLink(m, bw, rect, ChannelParams(rx_power_dbm_override=rx_dbm), cfg.adc_rate_hz)
    _, msgs = random_messages(m, cfg.n_symbols, seed)
    stats = link.noiseless_stats(msgs)
    rip = stats.ripple()
    return dict(m_order=m, bandwidth_hz=bw, rect_preset=rect_name, rx_power_dbm=rx_dbm,
                n_symbols=cfg.n_symbols, seed=cfg.seed, ripple_factor=rip.ripple_factor,
                peak_to_peak_v=rip.peak_to_peak, mean_vdc_v=rip.mean,
                p_del_w=stats.mean_square / rect.r_load)


def run_ripple(cfg: ExperimentConfig) -> SweepTable:
    _require_grid(m_orders=cfg.m_orders, bandwidths_hz=cfg.bandwidths_hz, rects=cfg.rects,
                  rx_power_dbm=cfg.rx_power_dbm)
    tasks = [(cfg, m, bw, r, p) for m, bw, r, p in
             itertools.product(cfg.m_orders, cfg.bandwidths_hz, cfg.rects, cfg.rx_power_dbm)]
    rows = _pmap(_ripple_task, tasks, cfg.workers)
    return SweepTable(cfg.output_name, RIPPLE_COLUMNS, rows, _manifest(cfg, RIPPLE_UNITS))


# --------------------------------------------------------------------------- waveform dump

WAVE_COLUMNS = ["point", "m_order", "bandwidth_hz", "rect_preset", "rx_power_dbm", "snr_db",
                "sample", "t_s", "symbol_index", "x_abs_sqrtw", "v_dc_v", "y_v", "ma_v"]
WAVE_UNITS = {"t_s": "s", "x_abs_sqrtw": "sqrt(W) (|x| of the received complex envelope)",
              "v_dc_v": "V", "y_v": "V", "ma_v": "V", "snr_db": "dB"}


def _wave_task(task) -> tuple[list[dict], dict]:
    cfg, idx, m, bw, rect_name, rx_dbm = task
    rect = load_rectifier_preset(rect_name)
    seed = SimSeed(cfg.seed, stream_key("link", m, round(rx_dbm * 1000)))
    link = PpmLink(m, bw, rect, ChannelParams(rx_power_dbm_override=rx_dbm), cfg.adc_rate_hz,
                   cfg.adc_bits, cfg.adc_full_scale_v)
    if cfg.messages:
        msgs = MessageSequence(cfg.messages, m)
    else:
        _, msgs = random_messages(m, cfg.n_symbols, seed)
    snr = cfg.snr_db[0] if cfg.snr_db else None
    noise = RectNoiseParams(snr_db=snr if snr is not None else math.inf)
    clean = RectNoiseParams(snr_db=math.inf)
    run = link.run(msgs, [noise, clean], seed, keep_traces=True)
    sps = link.ppm.samples_per_symbol
    start = run.traces["settling_samples"] - min(cfg.settling_rows, run.settling_symbols) * sps
    rate = link.ppm.sample_rate_hz
    t0 = run.traces["settling_samples"]
    x, v = run.traces["x"], run.traces["v_dc"]
    y, ma = run.traces["y"][0], run.traces["ma"][0]
    rows = []
    for k in range(start, x.size):
        rows.append(dict(point=idx, m_order=m, bandwidth_hz=bw, rect_preset=rect_name,
                         rx_power_dbm=rx_dbm, snr_db=snr, sample=k - t0, t_s=(k - t0) / rate,
                         symbol_index=(k - t0) // sps, x_abs_sqrtw=float(x[k]), v_dc_v=float(v[k]),
                         y_v=float(y[k]), ma_v=float(ma[k])))
    ma_clean = run.traces["ma"][1][t0:]
    first = ma_clean[:sps]
    decoded = run.outcomes[0].decoded.messages
    summary = {
        "point": idx,
        "transmitted": [int(s) for s in msgs.messages],
        "decoded": [int(s) for s in decoded],
        "decoded_bits": "".join(str(int(b)) for b in messages_to_bits(run.outcomes[0].decoded)),
        "first_symbol_vdc_peak_sample": int(np.argmax(v[t0:t0 + sps])),
        "first_symbol_ma_peak_sample": int(np.argmax(ma[t0:t0 + sps])),
        "first_symbol_noiseless_ma_peak_sample": int(np.argmax(first)),
        "first_symbol_noiseless_ma_peak_slot": int(np.argmax(first)) // link.window + 1,
        "window_samples": link.window,
    }
    return rows, summary


def dump_waveform(cfg: ExperimentConfig) -> SweepTable:
    _require_grid(m_orders=cfg.m_orders, bandwidths_hz=cfg.bandwidths_hz, rects=cfg.rects,
                  rx_power_dbm=cfg.rx_power_dbm)
    if cfg.snr_db and len(cfg.snr_db) > 1:
        raise InvalidConfig("waveform dumps take a single SNR")
    grid = list(itertools.product(cfg.m_orders, cfg.bandwidths_hz, cfg.rects, cfg.rx_power_dbm))
    tasks = [(cfg, i, *pt) for i, pt in enumerate(grid)]
    results = _pmap(_wave_task, tasks, cfg.workers)
    rows = [row for rs, _ in results for row in rs]
    summary = {"points": [s for _, s in results]}
    return SweepTable(cfg.output_name, WAVE_COLUMNS, rows, _manifest(cfg, WAVE_UNITS), summary)


# --------------------------------------------------------------------------- fading CDF

CDF_COLUMNS = ["draw", "modulation", "bandwidth_hz", "rect_preset", "h_abs2", "rx_power_dbm",
               "p_del_taylor_w", "p_del_behavioral_w"]
CDF_UNITS = {"h_abs2": "1", "rx_power_dbm": "dBm", "p_del_taylor_w": "W", "p_del_behavioral_w": "W"}
CDF_STEP_COLUMNS = ["modulation", "model", "p_del_w", "cumulative_probability"]


def _cdf_task(task) -> list[dict]:
    cfg, draw, h, path_loss, bw, rect_name = task
    seed = SimSeed(cfg.seed, stream_key("cdf", draw))
    channel = ChannelParams(path_loss_linear=path_loss, fading_coeff=complex(h))
    tx_w = dbm_to_watt(cfg.tx_power_dbm)
    rx_dbm = 10 * math.log10(tx_w * abs(h) ** 2 / path_loss / 1e-3)
    rows = []
    for label in cfg.modulations:
        res = harvest_one(Modulation.parse(label), bw, rect_name, channel, tx_w, cfg.n_symbols,
                          seed, cfg.adc_rate_hz)
        rows.append(dict(draw=draw, modulation=label, bandwidth_hz=bw, rect_preset=rect_name,
                         h_abs2=abs(h) ** 2, rx_power_dbm=rx_dbm,
                         p_del_taylor_w=res["p_del_taylor_w"],
                         p_del_behavioral_w=res["p_del_behavioral_w"]))
    return rows


def run_cdf(cfg: ExperimentConfig) -> SweepTable:
    _require_grid(modulations=cfg.modulations, bandwidths_hz=cfg.bandwidths_hz, rects=cfg.rects,
                  rx_power_dbm=cfg.rx_power_dbm)
    if cfg.n_draws < 1:
        raise InvalidConfig("n_draws must be >= 1")
    # mean received power fixes the path loss; |h|^2 spreads it per draw
    path_loss = dbm_to_watt(cfg.tx_power_dbm) / dbm_to_watt(cfg.rx_power_dbm[0])
    if path_loss < 1:
        raise InvalidConfig("mean received power exceeds the transmit power")
    h = sample_fading("rayleigh_block", SimSeed(cfg.seed, stream_key("fading")), cfg.n_draws)
    bw, rect_name = cfg.bandwidths_hz[0], cfg.rects[0]
    tasks = [(cfg, d, complex(h[d]), path_loss, bw, rect_name) for d in range(cfg.n_draws)]
    rows = [row for rs in _pmap(_cdf_task, tasks, cfg.workers) for row in rs]

    steps = []
    for label in cfg.modulations:
        for model in ("taylor", "behavioral"):
            values = [r[f"p_del_{model}_w"] for r in rows if r["modulation"] == label]
            xs, ps = empirical_cdf(values)
            steps.extend(dict(modulation=label, model=model, p_del_w=float(x),
                              cumulative_probability=float(p)) for x, p in zip(xs, ps))
    manifest = _manifest(cfg, CDF_UNITS)
    manifest["path_loss_linear"] = path_loss
    cdf_table = SweepTable(f"{cfg.output_name}_cdf", CDF_STEP_COLUMNS, steps, manifest)
    return SweepTable(cfg.output_name, CDF_COLUMNS, rows, manifest,
                      extra_tables={"cdf": cdf_table})


RUNNERS = {
    "ber-sweep": run_ber_sweep,
    "power-sweep": run_power_sweep,
    "ripple": run_ripple,
    "waveform": dump_waveform,
    "cdf": run_cdf,
}


def run_experiment(cfg: ExperimentConfig) -> SweepTable:
    return RUNNERS[cfg.command](cfg)


def write_outputs(table: SweepTable, output_dir: str | Path, plot: bool = False) -> list[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [table.to_csv(out / f"{table.name}.csv")]
    for sub in table.extra_tables.values():
        written.append(sub.to_csv(out / f"{sub.name}.csv"))
    manifest_path = out / f"{table.name}.manifest.json"
    manifest_path.write_text(json.dumps({**table.manifest, "summary": table.summary,
                                         "files": [p.name for p in written]},
                                        indent=2, sort_keys=True, default=_fmt) + "\n")
    written.append(manifest_path)
    if plot:
        from .plotting import plot_table
        written.append(plot_table(table, out / f"{table.name}.svg"))
    return written

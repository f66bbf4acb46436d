"""Command-line entry point: ``ppm-swipt <command> --seed N [--preset NAME] ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import SimulationError
from .experiments import (
    PRESETS,
    load_config_file,
    parse_range,
    resolve_config,
    run_experiment,
    write_outputs,
)

OUTPUT_ENV = "PPM_SWIPT_OUTPUT_DIR"


def _ints(text: str) -> list[int]:
    return [int(v) for v in parse_range(text)]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--preset", help="named experiment preset (see 'presets list')")
    p.add_argument("--config", help="YAML file with configuration keys")
    p.add_argument("--seed", type=int, help="master RNG seed (required here or in --config)")
    p.add_argument("--name", help="output file stem (default: preset or command name)")
    p.add_argument("--bandwidths-hz", type=parse_range, dest="bandwidths_hz",
                   help="e.g. '1e6 5e6' or '1e6:10e6:1e6'")
    p.add_argument("--rects", type=lambda s: s.replace(",", " ").split(),
                   help="rectifier presets or YAML paths, e.g. 'rect1,rect2'")
    p.add_argument("--rx-power-dbm", type=parse_range, dest="rx_power_dbm",
                   help="received power grid in dBm, e.g. '-30:-5:2.5'")
    p.add_argument("--n-symbols", type=int, dest="n_symbols")
    p.add_argument("--adc-rate-hz", type=float, dest="adc_rate_hz")
    p.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    p.add_argument("--output-dir", dest="output_dir",
                   help=f"output directory (default: ${OUTPUT_ENV} or ./results)")
    p.add_argument("--plot", action="store_true", default=None, help="also write an SVG plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppm-swipt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber-sweep", help="BER versus SNR or received power")
    _common(ber)
    ber.add_argument("--m-orders", type=_ints, dest="m_orders")
    ber.add_argument("--snr-db", type=parse_range, dest="snr_db", help="e.g. '0:40:2'")
    ber.add_argument("--sigma-v", type=float, dest="sigma_v",
                     help="fixed rectifier noise std in volts instead of an SNR grid")
    ber.add_argument("--adc-bits", type=int, dest="adc_bits")

    power = sub.add_parser("power-sweep", help="harvested power and gain over CW")
    _common(power)
    power.add_argument("--modulations", type=lambda s: s.replace(",", " ").split(),
                       help="e.g. 'CW,BPSK,16QAM,4-PPM'")

    ripple = sub.add_parser("ripple", help="ripple of the noiseless rectifier output")
    _common(ripple)
    ripple.add_argument("--m-orders", type=_ints, dest="m_orders")

    wave = sub.add_parser("waveform", help="dump x(t), v_DC, y[n] and M[n] traces")
    _common(wave)
    wave.add_argument("--m-orders", type=_ints, dest="m_orders")
    wave.add_argument("--snr-db", type=parse_range, dest="snr_db")
    wave.add_argument("--messages", type=_ints, help="fixed message indices, 1-based")

    cdf = sub.add_parser("cdf", help="harvested power CDF under Rayleigh block fading")
    _common(cdf)
    cdf.add_argument("--modulations", type=lambda s: s.replace(",", " ").split())
    cdf.add_argument("--n-draws", type=int, dest="n_draws")
    cdf.add_argument("--tx-power-dbm", type=float, dest="tx_power_dbm")

    presets = sub.add_parser("presets", help="inspect named presets")
    presets.add_argument("action", choices=["list"])
    return parser


def _list_presets() -> None:
    for name in sorted(PRESETS, key=lambda n: int(n[3:])):
        entry = PRESETS[name]
        print(f"{name:6s} {entry['command']:12s} {entry['description']}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            _list_presets()
            return 0
        overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        file_values = load_config_file(args.config) if args.config else {}
        if not overrides.get("output_dir") and "output_dir" not in file_values:
            overrides["output_dir"] = os.environ.get(OUTPUT_ENV, "results")
        cfg = resolve_config(args.command, file_values=file_values, overrides=overrides)
        table = run_experiment(cfg)
        for path in write_outputs(table, cfg.output_dir, plot=cfg.plot):
            print(path)
        return 0
    except SimulationError as err:
        print(json.dumps(err.as_dict(), default=str), file=sys.stderr)
        return 2
    except OSError as err:
        print(json.dumps({"error": "OSError", "message": str(err)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Optional SVG rendering of result tables (needs the ``plot`` extra)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

from .errors import InvalidConfig


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise InvalidConfig("plotting needs matplotlib: pip install 'ppm-swipt[plot]'") from exc
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "ppm-swipt"
    import matplotlib.pyplot as plt
    return plt


def _series(rows, key_cols, x_col, y_col):
    groups = defaultdict(lambda: ([], []))
    for row in rows:
        xs, ys = groups[tuple(row[c] for c in key_cols)]
        xs.append(row[x_col])
        ys.append(row[y_col])
    return groups


def plot_table(table, path: str | Path) -> Path:
    plt = _pyplot()
    command = table.manifest["command"]
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    rows = table.rows
    if command == "ber-sweep":
        x_col = "snr_db" if rows and rows[0]["snr_db"] is not None else "rx_power_dbm"
        for key, (xs, ys) in _series(rows, ["m_order", "bandwidth_hz", "rect_preset"], x_col, "ber").items():
            ax.semilogy(xs, [max(y, 1e-6) for y in ys], marker="o",
                        label=f"M={key[0]}, {key[1] / 1e6:g} MHz, {key[2]}")
        ax.set_xlabel("SNR [dB]" if x_col == "snr_db" else "received power [dBm]")
        ax.set_ylabel("BER")
    elif command == "power-sweep":
        for key, (xs, ys) in _series(rows, ["modulation", "bandwidth_hz", "rect_preset"],
                                     "rx_power_dbm", "p_del_behavioral_w").items():
            ax.semilogy(xs, ys, marker="o", label=f"{key[0]}, {key[1] / 1e6:g} MHz, {key[2]}")
        ax.set_xlabel("received power [dBm]")
        ax.set_ylabel("harvested power [W]")
    elif command == "ripple":
        for key, (xs, ys) in _series(rows, ["m_order", "rect_preset", "rx_power_dbm"],
                                     "bandwidth_hz", "ripple_factor").items():
            ax.plot([x / 1e6 for x in xs], ys, marker="o", label=f"M={key[0]}, {key[1]}, {key[2]:g} dBm")
        ax.set_xlabel("bandwidth [MHz]")
        ax.set_ylabel("ripple factor")
    elif command == "waveform":
        for key, (xs, ys) in _series(rows, ["point"], "t_s", "v_dc_v").items():
            ax.plot([x * 1e6 for x in xs], ys, label=f"v_DC point {key[0]}")
        for key, (xs, ys) in _series(rows, ["point"], "t_s", "ma_v").items():
            ax.plot([x * 1e6 for x in xs], ys, linestyle="--", label=f"M[n] point {key[0]}")
        ax.set_xlabel("time [us]")
        ax.set_ylabel("voltage [V]")
    elif command == "cdf":
        steps = table.extra_tables["cdf"].rows
        for key, (xs, ys) in _series([r for r in steps if r["model"] == "behavioral"],
                                     ["modulation"], "p_del_w", "cumulative_probability").items():
            ax.step(xs, ys, where="post", label=key[0])
        ax.set_xscale("log")
        ax.set_xlabel("harvested power [W]")
        ax.set_ylabel("CDF")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path

import json
import math

import pytest

from ppm_swipt import cli
from ppm_swipt.errors import InvalidConfig, MissingSeed, UnknownPreset
from ppm_swipt.experiments import (
    PRESETS,
    SNR_DEFINITION,
    dump_waveform,
    parse_range,
    resolve_config,
    run_ber_sweep,
    run_cdf,
    run_power_sweep,
    run_ripple,
    write_outputs,
)


def test_parse_range():
    assert parse_range("0:40:10") == [0.0, 10.0, 20.0, 30.0, 40.0]
    assert parse_range("-30:-5:2.5")[-1] == -5.0 and len(parse_range("-30:-5:2.5")) == 11
    assert parse_range("1e6, 5e6") == [1e6, 5e6]
    assert parse_range(3) == [3.0]
    with pytest.raises(InvalidConfig):
        parse_range("0:1")


def test_figure_presets_grids():
    fig7 = resolve_config("ber-sweep", "fig7", overrides={"seed": 1})
    assert fig7.m_orders == [2, 4, 8] and fig7.bandwidths_hz == [5e6]
    assert fig7.rects == ["rect1", "rect2"] and fig7.snr_db[0] == 0 and fig7.snr_db[-1] == 40
    fig8 = resolve_config("ber-sweep", "fig8", overrides={"seed": 1})
    assert fig8.m_orders == [4] and fig8.bandwidths_hz == [1e6, 2e6, 5e6, 10e6]
    fig11 = resolve_config("power-sweep", "fig11", overrides={"seed": 1})
    assert fig11.modulations == ["CW", "BPSK", "16QAM", "2-PPM", "4-PPM", "8-PPM"]
    assert fig11.rx_power_dbm == [-20.0] and fig11.rects == ["rect1"]
    fig15 = resolve_config("power-sweep", "fig15", overrides={"seed": 1})
    assert fig15.rx_power_dbm[0] == -30 and fig15.rx_power_dbm[-1] == -5
    fig18 = resolve_config("cdf", "fig18", overrides={"seed": 1})
    assert fig18.n_draws == 50
    fig5 = resolve_config("waveform", "fig5", overrides={"seed": 1})
    assert fig5.adc_rate_hz == 1e9 and fig5.snr_db == [20.0] and fig5.messages == [2]


def test_unknown_preset_lists_available():
    with pytest.raises(UnknownPreset) as err:
        resolve_config("ber-sweep", "fig99", overrides={"seed": 1})
    assert "fig7" in err.value.as_dict()["available"]


def test_preset_for_other_command():
    with pytest.raises(InvalidConfig):
        resolve_config("ripple", "fig7", overrides={"seed": 1})


def test_seed_is_mandatory():
    with pytest.raises(MissingSeed):
        resolve_config("ripple", "fig10")


def test_unknown_keys_rejected():
    with pytest.raises(InvalidConfig):
        resolve_config("ripple", file_values={"seed": 1, "colour": "red"})


@pytest.mark.parametrize("runner,command,override", [
    (run_ber_sweep, "ber-sweep", {"snr_db": []}),
    (run_ber_sweep, "ber-sweep", {"m_orders": [], "snr_db": [1.0]}),
    (run_power_sweep, "power-sweep", {"modulations": []}),
    (run_ripple, "ripple", {"bandwidths_hz": []}),
])
def test_empty_grid(runner, command, override):
    cfg = resolve_config(command, overrides={"seed": 1, **override})
    with pytest.raises(InvalidConfig):
        runner(cfg)


def test_file_values_override_preset_and_flags_override_file():
    cfg = resolve_config("ripple", "fig10", file_values={"seed": 4, "n_symbols": 120},
                         overrides={"n_symbols": 150})
    assert cfg.seed == 4 and cfg.n_symbols == 150 and cfg.m_orders == [2, 4, 8]


def _small_ber(workers=1):
    return resolve_config("ber-sweep", overrides=dict(seed=11, m_orders=[2, 4], bandwidths_hz=[5e6],
                                                      rects=["rect1", "rect2"], snr_db=[0.0, 10.0],
                                                      n_symbols=150, workers=workers))


def test_ber_sweep_rows_and_units():
    table = run_ber_sweep(_small_ber())
    assert len(table.rows) == 2 * 2 * 2
    header = table.header_block()
    assert SNR_DEFINITION in header
    assert '"snr_db": "dB"' in header and '"throughput_bps": "bit/s"' in header
    for row in table.rows:
        assert 0 <= row["ber_ci95_lo"] <= row["ber"] <= row["ber_ci95_hi"] <= 1


def test_common_random_numbers_across_rectifiers():
    table = run_ber_sweep(_small_ber())
    by = {(r["m_order"], r["rect_preset"], r["snr_db"]): r for r in table.rows}
    # same bits and noise draws: rect-only differences
    assert by[(2, "rect1", 0.0)]["n_bits"] == by[(2, "rect2", 0.0)]["n_bits"]


def test_worker_count_does_not_change_csv():
    one = run_ber_sweep(_small_ber(1)).body()
    two = run_ber_sweep(_small_ber(2)).body()
    assert one == two


def test_fixed_sigma_sweep_over_power():
    cfg = resolve_config("ber-sweep", overrides=dict(seed=2, m_orders=[4], rects=["rect2"],
                                                     rx_power_dbm=[-30.0, -15.0], sigma_v=1e-3,
                                                     n_symbols=300))
    rows = run_ber_sweep(cfg).rows
    assert [r["sigma_v"] for r in rows] == [1e-3, 1e-3]
    assert rows[0]["ber"] >= rows[1]["ber"]


def test_waveform_fig5_summary_and_noiseless_variant():
    table = dump_waveform(resolve_config("waveform", "fig5", overrides={"seed": 1}))
    point = table.summary["points"][0]
    assert point["decoded"] == [2] and point["decoded_bits"] == "01"
    assert point["first_symbol_noiseless_ma_peak_slot"] == 3
    data = [r for r in table.rows if r["symbol_index"] == 0]
    assert len(data) == 1000
    clean = dump_waveform(resolve_config("waveform", "fig5", overrides={"seed": 1, "snr_db": []}))
    assert all(r["y_v"] == r["v_dc_v"] for r in clean.rows)


def test_waveform_rejects_several_snrs():
    with pytest.raises(InvalidConfig):
        dump_waveform(resolve_config("waveform", overrides={"seed": 1, "snr_db": [1.0, 2.0]}))


def test_power_sweep_gain_columns():
    cfg = resolve_config("power-sweep", overrides=dict(seed=3, modulations=["BPSK", "4-PPM"],
                                                       n_symbols=100))
    rows = {r["modulation"]: r for r in run_power_sweep(cfg).rows}
    assert rows["BPSK"]["gain_over_cw_taylor_pct"] == pytest.approx(100.0)
    assert rows["4-PPM"]["gain_over_cw_behavioral_pct"] > 100.0


def test_cdf_outputs(tmp_path):
    cfg = resolve_config("cdf", overrides=dict(seed=5, modulations=["CW", "8-PPM"], n_draws=4,
                                               n_symbols=50))
    table = run_cdf(cfg)
    assert len(table.rows) == 8
    steps = table.extra_tables["cdf"].rows
    assert {s["model"] for s in steps} == {"taylor", "behavioral"}
    cw = [r["h_abs2"] for r in table.rows if r["modulation"] == "CW"]
    ppm = [r["h_abs2"] for r in table.rows if r["modulation"] == "8-PPM"]
    assert cw == ppm
    files = write_outputs(table, tmp_path)
    assert {f.name for f in files} == {"cdf.csv", "cdf_cdf.csv", "cdf.manifest.json"}


def test_ripple_rows():
    cfg = resolve_config("ripple", overrides=dict(seed=1, m_orders=[2, 8], n_symbols=50))
    rows = run_ripple(cfg).rows
    assert rows[0]["ripple_factor"] < rows[1]["ripple_factor"]


# ------------------------------------------------------------------------- CLI

def test_cli_presets_list(capsys):
    assert cli.main(["presets", "list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in PRESETS)


def test_cli_missing_seed_reports_json(capsys, tmp_path):
    code = cli.main(["ripple", "--preset", "fig10", "--output-dir", str(tmp_path)])
    assert code != 0
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "MissingSeed"


def test_cli_unknown_preset(capsys, tmp_path):
    assert cli.main(["ber-sweep", "--preset", "nope", "--seed", "1", "--output-dir", str(tmp_path)]) != 0
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"] == "UnknownPreset" and "fig7" in err["available"]


def test_cli_writes_csv_and_manifest(tmp_path, monkeypatch):
    monkeypatch.setenv("PPM_SWIPT_OUTPUT_DIR", str(tmp_path))
    code = cli.main(["ripple", "--seed", "2", "--m-orders", "4", "--bandwidths-hz", "5e6",
                     "--n-symbols", "40", "--name", "tiny"])
    assert code == 0
    text = (tmp_path / "tiny.csv").read_text()
    assert text.startswith("# tool:")
    assert "# snr_definition:" in text
    body = [line for line in text.splitlines() if not line.startswith("#")]
    assert body[0].startswith("m_order,bandwidth_hz,rect_preset,rx_power_dbm")
    manifest = json.loads((tmp_path / "tiny.manifest.json").read_text())
    assert manifest["seed"] == 2 and manifest["config"]["m_orders"] == [4]
    assert "version" in manifest


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("preset: fig10\nseed: 8\nm_orders: [2]\nbandwidths_hz: [10.0e+6]\nrects: [rect2]\n"
                   "n_symbols: 30\n")
    assert cli.main(["ripple", "--config", str(cfg), "--output-dir", str(tmp_path)]) == 0
    text = (tmp_path / "fig10.csv").read_text()
    rows = [l for l in text.splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 1 and rows[0].startswith("2,10000000.0,rect2")


def test_cli_plot(tmp_path):
    pytest.importorskip("matplotlib")
    assert cli.main(["ripple", "--seed", "1", "--m-orders", "2", "--n-symbols", "20",
                     "--output-dir", str(tmp_path), "--plot"]) == 0
    assert (tmp_path / "ripple.svg").read_text().lstrip().startswith("<?xml")


def test_cli_rerun_is_byte_identical(tmp_path):
    args = ["power-sweep", "--seed", "4", "--modulations", "CW,4-PPM", "--n-symbols", "60"]
    assert cli.main(args + ["--output-dir", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--output-dir", str(tmp_path / "b"), "--workers", "2"]) == 0
    a = (tmp_path / "a" / "power-sweep.csv").read_text()
    b = (tmp_path / "b" / "power-sweep.csv").read_text()
    strip = lambda t: [l for l in t.splitlines() if not l.startswith("#")]
    assert strip(a) == strip(b)
    assert not math.isnan(float(strip(a)[1].split(",")[6]))

"""Property-based checks of the model invariants."""

import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ppm_swipt.channel import ChannelParams, apply_channel
from ppm_swipt.metrics import ber, empirical_cdf, gain_over_cw, throughput
from ppm_swipt.modulator import (
    MessageSequence,
    PpmConfig,
    bits_to_messages,
    messages_to_bits,
    modulate_ppm,
)
from ppm_swipt.receiver import DemodConfig, decode_symbol, moving_average_array
from ppm_swipt.rectifier import harvested_power_taylor, taylor_scaling_power
from ppm_swipt.signals import Waveform, mean_square, papr

orders = st.sampled_from([2, 4, 8, 16])
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def ppm_streams(draw):
    m = draw(orders)
    msgs = draw(st.lists(st.integers(1, m), min_size=1, max_size=40))
    power = draw(st.floats(1e-9, 10.0))
    spc = draw(st.integers(2, 6))
    return MessageSequence(msgs, m), PpmConfig(m, 5e6, power, samples_per_chip=spc)


@given(ppm_streams())
def test_ppm_power_papr_and_confinement(stream):
    msgs, cfg = stream
    wf = modulate_ppm(msgs, cfg)
    assert math.isclose(mean_square(wf), cfg.avg_power_w, rel_tol=1e-9)
    assert math.isclose(papr(wf), cfg.m_order + 1, rel_tol=1e-12)
    chips = np.abs(wf.samples).reshape(len(msgs), cfg.chips_per_symbol, cfg.samples_per_chip)
    active = np.zeros_like(chips, dtype=bool)
    active[np.arange(len(msgs)), msgs.messages - 1, :] = True
    assert not chips[~active].any()


@given(arrays(np.complex128, st.integers(1, 50),
              elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)),
       st.floats(1e-3, 1e3))
def test_papr_scale_invariant(samples, scale):
    assume(np.mean(np.abs(samples) ** 2) > 1e-6)
    wf = Waveform(samples, 1.0)
    assert math.isclose(papr(wf), papr(wf.scaled(scale)), rel_tol=1e-9)


@given(orders, st.data())
def test_bits_round_trip(m, data):
    k = int(math.log2(m))
    bits = data.draw(st.lists(st.integers(0, 1), max_size=30 * k).map(lambda b: b[: len(b) // k * k]))
    assert messages_to_bits(bits_to_messages(bits, m)).tolist() == bits


@given(st.integers(2, 8), st.integers(2, 6), st.data())
def test_decode_invariant_to_scale_and_offset(m_half, window, data):
    m = 2 ** int(math.log2(m_half))
    n = (m + 1) * window
    seg = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    scale = data.draw(st.floats(1e-3, 1e3))
    offset = data.draw(st.floats(-10, 10))
    cfg = DemodConfig(1e9, window, n)
    base = decode_symbol(seg, cfg, m)
    assert decode_symbol(seg * scale, cfg, m) == base
    # offset invariance needs exact float ties preserved; compare on a dyadic grid
    grid = np.round(seg * 64) / 64
    assert decode_symbol(grid + round(offset), cfg, m) == decode_symbol(grid, cfg, m)


@given(ppm_streams(), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False,
                                         allow_infinity=False),
       st.floats(1.0, 1e6))
def test_channel_linear(stream, a, loss):
    msgs, cfg = stream
    wf = modulate_ppm(msgs, cfg)
    params = ChannelParams(path_loss_linear=loss, fading_coeff=0.3 + 0.4j)
    lhs = apply_channel(wf.scaled(a), params).samples
    rhs = a * apply_channel(wf, params).samples
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-300)


@given(st.floats(1e-12, 1.0), orders)
def test_ppm_taylor_gain_exceeds_cw(power, m):
    assert gain_over_cw(taylor_scaling_power(f"{m}-PPM", power), taylor_scaling_power("CW", power)) > 100.0


@given(st.floats(1e-9, 1e-2), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_taylor_monotone_in_fourth_moment(power, f1, f2):
    # two-level envelopes of equal mean power, higher level fraction -> lower fourth moment
    def wave(frac):
        frac = 0.05 + 0.9 * frac
        n_on = max(1, int(round(frac * 200)))
        x = np.zeros(200)
        x[:n_on] = math.sqrt(power * 200 / n_on)
        return Waveform(x, 1.0)
    a, b = wave(min(f1, f2)), wave(max(f1, f2))
    assert math.isclose(mean_square(a), mean_square(b), rel_tol=1e-9)
    ea = np.mean(np.abs(a.samples) ** 4)
    eb = np.mean(np.abs(b.samples) ** 4)
    if ea >= eb:
        assert harvested_power_taylor(a) >= harvested_power_taylor(b) * (1 - 1e-12)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200), st.data())
def test_ber_in_unit_interval(tx, data):
    rx = data.draw(st.lists(st.integers(0, 1), min_size=len(tx), max_size=len(tx)))
    res = ber(tx, rx)
    assert 0.0 <= res.ci95[0] <= res.ber <= res.ci95[1] <= 1.0


@given(st.lists(finite, min_size=1, max_size=100, unique=True))
def test_empirical_cdf_range(values):
    x, p = empirical_cdf(values)
    assert np.all(np.diff(x) > 0) and np.all(np.diff(p) > 0)
    assert math.isclose(p[0], 1 / len(values)) and p[-1] == 1.0


@given(st.lists(finite, min_size=1, max_size=100))
def test_empirical_cdf_nondecreasing(values):
    _, p = empirical_cdf(values)
    assert np.all(np.diff(p) >= 0) and p[-1] == 1.0 and p[0] >= 1 / len(values)


@given(st.floats(1e3, 1e10))
def test_throughput_peaks_at_four(bw):
    rates = [throughput(m, bw) for m in (2, 4, 8, 16)]
    assert int(np.argmax(rates)) == 1


@given(arrays(np.float64, st.integers(2, 300), elements=st.floats(-1, 1)), st.integers(1, 20),
       st.data())
def test_moving_average_split_invariance(y, window, data):
    cut = data.draw(st.integers(1, y.size - 1))
    whole = moving_average_array(y, window)
    parts = np.concatenate([moving_average_array(y[:cut], window),
                            moving_average_array(y[cut:], window, history=y[:cut])])
    assert np.allclose(whole, parts, atol=1e-12)

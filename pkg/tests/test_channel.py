import numpy as np
import pytest

from ppm_swipt.channel import ChannelParams, apply_channel, free_space_path_loss, sample_fading
from ppm_swipt.errors import InvalidConfig
from ppm_swipt.modulator import MessageSequence, PpmConfig, modulate_ppm
from ppm_swipt.signals import SimSeed, Waveform, mean_square


def _ppm():
    return modulate_ppm(MessageSequence([1, 3, 2, 4], 4), PpmConfig(4, 5e6, 1.0))


def test_unit_channel_is_identity():
    wf = _ppm()
    assert np.array_equal(apply_channel(wf, ChannelParams()).samples, wf.samples)


def test_path_loss_scales_power():
    rx = apply_channel(_ppm(), ChannelParams(path_loss_linear=100.0))
    assert mean_square(rx) == pytest.approx(1e-2, rel=1e-12)


def test_power_override():
    rx = apply_channel(_ppm(), ChannelParams(path_loss_linear=7.0, rx_power_dbm_override=-20.0))
    assert abs(mean_square(rx) - 1e-5) <= 1e-12


def test_fading_rotates_and_scales():
    h = 0.6 - 0.8j
    wf = _ppm()
    rx = apply_channel(wf, ChannelParams(fading_coeff=h))
    assert np.allclose(rx.samples, h * wf.samples)


def test_fixed_fading():
    assert sample_fading("fixed", SimSeed(0)) == 1 + 0j


def test_rayleigh_unit_mean_power():
    h = sample_fading("rayleigh_block", SimSeed(17), 100_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)


def test_rayleigh_reproducible_and_prefix_consistent():
    one = sample_fading("rayleigh_block", SimSeed(3))
    many = sample_fading("rayleigh_block", SimSeed(3), 5)
    assert one == sample_fading("rayleigh_block", SimSeed(3))
    assert one == many[0]


def test_unknown_fading_model():
    with pytest.raises(InvalidConfig):
        sample_fading("rician", SimSeed(0))


def test_invalid_path_loss():
    with pytest.raises(InvalidConfig):
        ChannelParams(path_loss_linear=0.0)


def test_free_space_loss_grows_with_distance():
    assert free_space_path_loss(5.0) > free_space_path_loss(0.5) > 1.0
    assert free_space_path_loss(1.0, 2.45e9) == pytest.approx((4 * np.pi / (299_792_458.0 / 2.45e9)) ** 2)


def test_override_on_zero_signal_rejected():
    with pytest.raises(InvalidConfig):
        apply_channel(Waveform(np.zeros(8), 1.0), ChannelParams(rx_power_dbm_override=-20.0))

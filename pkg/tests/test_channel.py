import numpy as np
import pytest

from smlink.channel import (
    draw_channel,
    draw_channel_batch,
    draw_noise,
    noise_variance_from_snr,
    rayleigh_bpsk_ber,
)


def test_same_seed_same_channel():
    a = draw_channel(4, 4, np.random.default_rng(123))
    b = draw_channel(4, 4, np.random.default_rng(123))
    assert np.array_equal(a, b)
    assert a.shape == (4, 4)


def test_channel_entry_statistics():
    h = draw_channel_batch(70000, 4, 4, np.random.default_rng(7))  # >1e6 entries
    power = np.abs(h) ** 2
    assert np.mean(power) == pytest.approx(1.0, rel=0.01)
    assert np.var(h.real) == pytest.approx(0.5, rel=0.01)
    assert np.var(h.imag) == pytest.approx(0.5, rel=0.01)
    assert abs(np.mean(h)) < 0.01


def test_noise_variance_from_snr():
    assert noise_variance_from_snr(0.0) == pytest.approx(1.0)
    assert noise_variance_from_snr(10.0) == pytest.approx(0.1)
    assert noise_variance_from_snr(3.0103) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ValueError):
        noise_variance_from_snr(10.0, signal_power=0.0)


def test_noise_statistics():
    n = draw_noise(10 ** 6, 2.0, np.random.default_rng(11))
    assert np.mean(np.abs(n) ** 2) == pytest.approx(2.0, rel=0.01)
    assert np.var(n.real) == pytest.approx(1.0, rel=0.02)


def test_zero_noise_is_exactly_zero():
    n = draw_noise((3, 5), 0.0, np.random.default_rng(0))
    assert np.all(n == 0)


def test_noise_deterministic_under_seed():
    a = draw_noise(100, 0.3, np.random.default_rng(42))
    b = draw_noise(100, 0.3, np.random.default_rng(42))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        draw_noise(10, -1.0, np.random.default_rng(0))


def test_rayleigh_bpsk_closed_form():
    # 0.5 * (1 - sqrt(gamma / (1 + gamma)))
    assert rayleigh_bpsk_ber(10.0) == pytest.approx(0.02327, abs=5e-6)
    assert rayleigh_bpsk_ber(0.0) == pytest.approx(0.5 * (1 - np.sqrt(0.5)), abs=1e-12)

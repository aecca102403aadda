"""Flat Rayleigh fading draws, AWGN and SNR-to-noise-variance conversion.

Channel entries are i.i.d. circularly-symmetric complex Gaussian CN(0, 1);
column v of H is the path-gain vector from transmit antenna v to all
receive antennas.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseModel:
    """Noise variance per complex dimension at a target average SNR."""

    rho_db: float
    n0: float

    @classmethod
    def from_snr(cls, rho_db: float, signal_power: float = 1.0) -> "NoiseModel":
        return cls(rho_db=rho_db, n0=noise_variance_from_snr(rho_db, signal_power))


def noise_variance_from_snr(rho_db: float, signal_power: float = 1.0) -> float:
    """N0 such that signal_power / N0 equals the linear SNR."""
    if signal_power <= 0:
        raise ValueError("signal_power must be positive")
    return signal_power / 10.0 ** (rho_db / 10.0)


def draw_channel(n_r: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    """One N_R x N_T matrix of i.i.d. CN(0, 1) path gains."""
    return draw_channel_batch(1, n_r, n_t, rng)[0]


def _complex_normal(shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussians (interleaved draw)."""
    flat = rng.standard_normal((int(np.prod(shape)) * 2,))
    return flat.view(np.complex128).reshape(shape) / np.sqrt(2.0)


def draw_channel_batch(count: int, n_r: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    """(count, N_R, N_T) stack of independent Rayleigh channel draws."""
    return _complex_normal((count, n_r, n_t), rng)


def draw_noise(shape, n0: float, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. CN(0, N0) samples; real/imag parts carry N0/2 each."""
    if n0 < 0:
        raise ValueError("noise variance must be non-negative")
    if n0 == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    return np.sqrt(n0) * _complex_normal(shape, rng)


def rayleigh_bpsk_ber(rho_db: float) -> float:
    """Closed-form BER of 1x1 BPSK with ML detection over Rayleigh fading."""
    gamma = 10.0 ** (rho_db / 10.0)
    return 0.5 * (1.0 - np.sqrt(gamma / (1.0 + gamma)))

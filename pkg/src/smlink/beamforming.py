"""ULA steering weights, transmit array gain and the ABF-effective channel.

Each transmit antenna carries a uniform linear array of L phase-shifter
elements steered at the angle of departure.  With the steering matched to
the AoD every element combines coherently, so the net effect on a flat
fading coefficient is a deterministic amplitude gain of L; the cumulative
SNR gain over a single element is 20*log10(L) dB and the increment from
L-1 to L elements is 20*log10(L/(L-1)) dB.
"""

from dataclasses import dataclass

import numpy as np

# 60 GHz carrier: 0.5 cm wavelength, elements spaced half a wavelength apart
DEFAULT_WAVELENGTH_M = 0.005
DEFAULT_SPACING_M = DEFAULT_WAVELENGTH_M / 2.0


@dataclass(frozen=True)
class ArrayConfig:
    """Per-antenna ULA: element count, geometry and steered departure angle."""

    L: int
    spacing_m: float = DEFAULT_SPACING_M
    wavelength_m: float = DEFAULT_WAVELENGTH_M
    aod_rad: float = 0.0

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("element count L must be >= 1")
        if self.spacing_m <= 0 or self.wavelength_m <= 0:
            raise ValueError("spacing and wavelength must be positive")
        if abs(self.aod_rad) > np.pi / 2:
            raise ValueError("AoD must lie in [-pi/2, pi/2]")

    @property
    def phase_step(self) -> float:
        """Electrical phase shift between adjacent elements."""
        return self.spacing_m * (2.0 * np.pi / self.wavelength_m) * np.sin(self.aod_rad)


def steering_weights(cfg: ArrayConfig) -> np.ndarray:
    """Steering vector [1, e^{-j delta}, ..., e^{-j (L-1) delta}]."""
    k = np.arange(cfg.L)
    return np.exp(-1j * k * cfg.phase_step)


def array_response(cfg: ArrayConfig, angle_rad: float) -> np.ndarray:
    """Array response toward an arbitrary angle (same geometry as the weights)."""
    delta = cfg.spacing_m * (2.0 * np.pi / cfg.wavelength_m) * np.sin(angle_rad)
    return np.exp(-1j * np.arange(cfg.L) * delta)


def beam_pattern(cfg: ArrayConfig, angle_rad: float) -> float:
    """|w^H a(angle)|; maximized (= L) exactly at the steered AoD."""
    w = steering_weights(cfg)
    return float(np.abs(np.vdot(w, array_response(cfg, angle_rad))))


def array_gain_factor(L: int) -> float:
    """Amplitude gain of an L-element matched array relative to L = 1."""
    if L < 1:
        raise ValueError("element count L must be >= 1")
    return float(L)


def cumulative_gain_db(L: int) -> float:
    """SNR gain of L matched elements over a single element, in dB."""
    return 20.0 * np.log10(array_gain_factor(L))


def incremental_gain_db(L: int) -> float:
    """SNR gain of L elements over L - 1 elements, in dB."""
    if L < 2:
        raise ValueError("incremental gain needs L >= 2")
    return 20.0 * np.log10(L / (L - 1.0))


def apply_abf(h: np.ndarray, cfg: ArrayConfig) -> np.ndarray:
    """ABF-effective channel L * H for boresight-matched steering."""
    return array_gain_factor(cfg.L) * np.asarray(h, dtype=np.complex128)

"""Link-level Monte Carlo BER simulator for SM, STBC-SM and V-BLAST.

Transmission schemes run over i.i.d. flat Rayleigh fading with optional
ZF/MMSE digital precoding, ULA analog beamforming (ABF) and their hybrid
combination (HBF).  Everything is seeded and reproducible; sweeps write
plain CSV.
"""

from smlink.constellation import Constellation, build_constellation, map_bits
from smlink.channel import NoiseModel, draw_channel, draw_noise, noise_variance_from_snr
from smlink.precoding import Precoder, zf_precoder, mmse_precoder, effective_channel
from smlink.beamforming import ArrayConfig, steering_weights, array_gain_factor, apply_abf
from smlink.engine import SimConfig, BerRecord, run_point, run_sweep, snr_gap_at_ber

__all__ = [
    "Constellation", "build_constellation", "map_bits",
    "NoiseModel", "draw_channel", "draw_noise", "noise_variance_from_snr",
    "Precoder", "zf_precoder", "mmse_precoder", "effective_channel",
    "ArrayConfig", "steering_weights", "array_gain_factor", "apply_abf",
    "SimConfig", "BerRecord", "run_point", "run_sweep", "snr_gap_at_ber",
]

"""Spatial modulation: antenna-index mapping and exhaustive ML detection.

A block of log2(N_T) + log2(M) bits selects one active transmit antenna
(first bits, MSB first) and one constellation symbol (remaining bits).
The receiver minimizes the Euclidean distance over all N_T * M hypotheses
against the effective channel, which is H itself for the plain scheme,
L * H under analog beamforming, H (beta P) under digital precoding, and
L * H (beta P) under hybrid beamforming.  Under precoding the effective
channel is square (N_R columns) but the spatial index still ranges over
the first N_T columns only, keeping the bit budget of the plain scheme.

Ties in the detector break toward the lowest (antenna index, symbol label)
pair, compared lexicographically.
"""

from dataclasses import dataclass

import numpy as np

from smlink.beamforming import ArrayConfig, apply_abf
from smlink.channel import draw_channel_batch, draw_noise
from smlink.constellation import Constellation, bits_to_index
from smlink.precoding import (
    Precoder,
    effective_channel,
    mmse_precoder_batch,
    zf_precoder_batch,
)

PLAIN = "plain"
PRECODED = "precoded"
ABF = "abf"
HBF = "hbf"

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)


@dataclass(frozen=True)
class SmFrame:
    bits: np.ndarray
    antenna_index: int
    symbol: complex
    x: np.ndarray


def sm_bits_per_block(n_t: int, c: Constellation) -> int:
    return int(np.log2(n_t)) + c.bits_per_symbol


def sm_map(bits, n_t: int, c: Constellation) -> SmFrame:
    """Map an SM bit block onto a one-hot transmit vector."""
    if n_t < 1 or (n_t & (n_t - 1)) != 0:
        raise ValueError(f"SM needs a power-of-2 antenna count, got {n_t}")
    index_bits = int(np.log2(n_t))
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (index_bits + c.bits_per_symbol,):
        raise ValueError(
            f"expected {index_bits + c.bits_per_symbol} bits, got {bits.shape}"
        )
    antenna = bits_to_index(bits[:index_bits])
    symbol = complex(c.points[bits_to_index(bits[index_bits:])])
    x = np.zeros(n_t, dtype=np.complex128)
    x[antenna] = symbol
    return SmFrame(bits=bits, antenna_index=antenna, symbol=symbol, x=x)


def sm_effective_channel(h, variant: str, precoder: Precoder | None = None,
                         array: ArrayConfig | None = None) -> np.ndarray:
    """Effective channel for one variant; detection and transmission share it."""
    h = np.asarray(h, dtype=np.complex128)
    if variant == PLAIN:
        return h
    if variant == ABF:
        if array is None:
            raise ValueError("abf variant needs an ArrayConfig")
        return apply_abf(h, array)
    if variant == PRECODED:
        if precoder is None:
            raise ValueError("precoded variant needs a precoder")
        return effective_channel(h, precoder)
    if variant == HBF:
        if precoder is None or array is None:
            raise ValueError("hbf variant needs a precoder and an ArrayConfig")
        return effective_channel(apply_abf(h, array), precoder)
    raise ValueError(f"unknown SM variant {variant!r}")


def sm_transmit_receive(frame: SmFrame, h, variant: str, n0: float,
                        rng: np.random.Generator, precoder: Precoder | None = None,
                        array: ArrayConfig | None = None):
    """One noisy channel use; returns (received vector, effective channel)."""
    h_eff = sm_effective_channel(h, variant, precoder, array)
    y = h_eff[:, frame.antenna_index] * frame.symbol
    y = y + draw_noise(y.shape, n0, rng)
    return y, h_eff


def sm_ml_detect(y, h_eff, c: Constellation, index_count: int):
    """Exhaustive ML over all (antenna, symbol) hypotheses.

    Returns (antenna index, symbol, demapped bits).
    """
    y = np.asarray(y, dtype=np.complex128)
    h_eff = np.asarray(h_eff, dtype=np.complex128)
    if h_eff.shape[1] < index_count:
        raise ValueError("effective channel has fewer columns than index_count")
    # candidates[l, m, :] = column l times symbol m
    cand = h_eff[:, :index_count].T[:, None, :] * c.points[None, :, None]
    metric = np.sum(np.abs(y[None, None, :] - cand) ** 2, axis=-1)
    flat = int(np.argmin(metric))  # row-major: lowest (l, label) wins ties
    l_hat, m_hat = divmod(flat, c.M)
    index_bits = int(np.log2(index_count)) if index_count > 1 else 0
    bits = np.concatenate([
        np.array([(l_hat >> (index_bits - 1 - b)) & 1 for b in range(index_bits)],
                 dtype=np.uint8),
        c.bits_of(m_hat),
    ])
    return l_hat, complex(c.points[m_hat]), bits


class SmSimulator:
    """Vectorized block simulator used by the Monte Carlo engine."""

    def __init__(self, n_t: int, n_r: int, c: Constellation, variant: str,
                 precoding: str | None = None, L: int = 1):
        if n_t < 1 or (n_t & (n_t - 1)) != 0:
            raise ValueError(f"SM needs a power-of-2 antenna count, got {n_t}")
        self.n_t = n_t
        self.n_r = n_r
        self.c = c
        self.variant = variant
        self.precoding = precoding
        self.L = L
        self.index_bits = int(np.log2(n_t))
        self.bits_per_block = self.index_bits + c.bits_per_symbol
        self.max_batch_blocks = 65536
        self.redraws = 0

    def _effective(self, h: np.ndarray, n0: float) -> np.ndarray:
        if self.variant in (PRECODED, HBF):
            bp, _ = (zf_precoder_batch(h) if self.precoding == "zf"
                     else mmse_precoder_batch(h, n0))
            return h @ bp[:, :, :self.n_t]
        return h

    def simulate(self, n_blocks: int, n0: float, rng: np.random.Generator) -> int:
        """Run n_blocks independent blocks, return the total bit error count."""
        n_t, n_r, c = self.n_t, self.n_r, self.c
        h = draw_channel_batch(n_blocks, n_r, n_t, rng)
        l_true = rng.integers(0, n_t, size=n_blocks)
        m_true = rng.integers(0, c.M, size=n_blocks)

        if self.variant in (ABF, HBF):
            h = self.L * h
        h_eff = self._effective(h, n0)
        # numerically singular draws are silently redrawn (and counted)
        bad = ~np.isfinite(h_eff).all(axis=(1, 2))
        while bad.any():
            self.redraws += int(bad.sum())
            fresh = draw_channel_batch(int(bad.sum()), n_r, n_t, rng)
            if self.variant in (ABF, HBF):
                fresh = self.L * fresh
            h[bad] = fresh
            h_eff[bad] = self._effective(fresh, n0)
            bad &= ~np.isfinite(h_eff).all(axis=(1, 2))

        symbols = c.points[m_true]
        y = h_eff[np.arange(n_blocks), :, l_true] * symbols[:, None]
        y = y + draw_noise(y.shape, n0, rng)

        # ||y - h_l s||^2 = ||y||^2 - 2 Re(s* h_l^H y) + |s|^2 ||h_l||^2;
        # the ||y||^2 term drops out of the argmin
        cols = h_eff[:, :, :n_t]
        z = np.einsum("brl,br->bl", np.conj(cols), y)
        colnorm = np.sum(np.abs(cols) ** 2, axis=1)
        energy = np.abs(c.points) ** 2
        metric = (colnorm[:, :, None] * energy[None, None, :]
                  - 2.0 * (z[:, :, None] * np.conj(c.points)[None, None, :]).real)
        flat = np.argmin(metric.reshape(n_blocks, -1), axis=1)
        l_hat = flat // c.M
        m_hat = flat % c.M

        errors = _POPCOUNT[l_true ^ l_hat] + _POPCOUNT[m_true ^ m_hat]
        return int(errors.sum())

"""V-BLAST spatial multiplexing with joint ML detection.

All N_T antennas radiate one symbol per channel use, scaled by 1/sqrt(N_T)
so the total transmit energy stays at 1.  Detection enumerates all M^N_T
transmit vectors; a guard refuses hypothesis spaces above 2^20.
"""

from dataclasses import dataclass

import numpy as np

from smlink.channel import draw_channel_batch, draw_noise
from smlink.constellation import Constellation

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)

MAX_HYPOTHESES = 1 << 20


@dataclass(frozen=True)
class VblastFrame:
    bits: np.ndarray
    x: np.ndarray


def vblast_bits_per_block(n_t: int, c: Constellation) -> int:
    return n_t * c.bits_per_symbol


def vblast_map(bits, n_t: int, c: Constellation) -> VblastFrame:
    """Map n_t * log2(M) bits onto the scaled transmit vector."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (n_t * c.bits_per_symbol,):
        raise ValueError(f"expected {n_t * c.bits_per_symbol} bits, got {bits.shape}")
    labels = bits.reshape(n_t, c.bits_per_symbol)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    idx = labels @ weights
    return VblastFrame(bits=bits, x=c.points[idx] / np.sqrt(n_t))


def _hypotheses(n_t: int, c: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """All label tuples (lexicographic) and the matching transmit vectors."""
    count = c.M ** n_t
    if count > MAX_HYPOTHESES:
        raise ValueError(
            f"hypothesis space M^N_T = {count} exceeds the 2^20 joint-ML guard"
        )
    flat = np.arange(count)
    labels = np.empty((count, n_t), dtype=np.int64)
    for t in range(n_t - 1, -1, -1):
        flat, labels[:, t] = np.divmod(flat, c.M)
    return labels, c.points[labels] / np.sqrt(n_t)


def vblast_ml_detect(y, h, c: Constellation, n_t: int) -> np.ndarray:
    """Exhaustive joint ML; ties break toward the lowest label tuple."""
    labels, xs = _hypotheses(n_t, c)
    y = np.asarray(y, dtype=np.complex128)
    cand = xs @ np.asarray(h, dtype=np.complex128).T
    metric = np.sum(np.abs(y[None, :] - cand) ** 2, axis=-1)
    best = labels[int(np.argmin(metric))]
    return np.concatenate([c.bits_of(m) for m in best])


def vblast_transmit_receive(frame: VblastFrame, h, n0: float,
                            rng: np.random.Generator) -> np.ndarray:
    y = np.asarray(h, dtype=np.complex128) @ frame.x
    return y + draw_noise(y.shape, n0, rng)


class VblastSimulator:
    """Vectorized block simulator used by the Monte Carlo engine."""

    def __init__(self, n_t: int, n_r: int, c: Constellation):
        self.n_t = n_t
        self.n_r = n_r
        self.c = c
        self.bits_per_block = vblast_bits_per_block(n_t, c)
        self.labels, self.xs = _hypotheses(n_t, c)
        self.max_batch_blocks = 65536
        self.redraws = 0

    def simulate(self, n_blocks: int, n0: float, rng: np.random.Generator) -> int:
        """Run n_blocks independent channel uses, return total bit errors."""
        c, n_t = self.c, self.n_t
        h = draw_channel_batch(n_blocks, self.n_r, n_t, rng)
        m_true = rng.integers(0, c.M, size=(n_blocks, n_t))
        x = c.points[m_true] / np.sqrt(n_t)
        y = np.einsum("brt,bt->br", h, x)
        y = y + draw_noise(y.shape, n0, rng)

        cand = np.einsum("brt,ht->bhr", h, self.xs)
        metric = np.sum(np.abs(y[:, None, :] - cand) ** 2, axis=-1)
        m_hat = self.labels[np.argmin(metric, axis=1)]

        return int(_POPCOUNT[m_true ^ m_hat].sum())

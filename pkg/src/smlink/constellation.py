"""M-PSK / M-QAM symbol sets with Gray bit labeling and unit average energy.

Points are stored indexed by label value, i.e. ``points[k]`` is the symbol
whose bit label is the MSB-first binary expansion of ``k``.  That makes
mapping and demapping trivial and pins a deterministic tie-break order
(lowest label first) for detectors that scan the point list.
"""

from dataclasses import dataclass, field

import numpy as np

PSK = "psk"
QAM = "qam"


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _inverse_gray(g: int) -> int:
    n = 0
    while g:
        n ^= g
        g >>= 1
    return n


@dataclass(frozen=True)
class Constellation:
    """An M-ary symbol set with unit average energy.

    points[k] is the complex symbol labeled by the bits of k (MSB first).
    """

    kind: str
    M: int
    points: np.ndarray
    bits_per_symbol: int
    labels: np.ndarray = field(init=False)

    def __post_init__(self):
        labels = np.array(
            [[(k >> (self.bits_per_symbol - 1 - b)) & 1 for b in range(self.bits_per_symbol)]
             for k in range(self.M)],
            dtype=np.uint8,
        )
        object.__setattr__(self, "labels", labels)
        self.points.setflags(write=False)

    def bits_of(self, index: int) -> np.ndarray:
        """Bit label of a point, MSB first."""
        return self.labels[index]

    def nearest(self, z: complex) -> int:
        """Label of the closest point to z (lowest label wins ties)."""
        return int(np.argmin(np.abs(np.asarray(z) - self.points)))


def _psk_points(m: int) -> np.ndarray:
    # BPSK sits on the real axis (0 -> +1, 1 -> -1); larger orders get the
    # conventional pi/M offset so QPSK lands on the diagonals.
    offset = 0.0 if m == 2 else np.pi / m
    points = np.empty(m, dtype=np.complex128)
    for g in range(m):
        points[_gray(g)] = np.exp(1j * (offset + 2.0 * np.pi * g / m))
    # snap axis points (BPSK's -1, QPSK-free) clean of roundoff dust
    points.real[np.abs(points.real) < 1e-15] = 0.0
    points.imag[np.abs(points.imag) < 1e-15] = 0.0
    return points


def _qam_points(m: int) -> np.ndarray:
    side = int(round(np.sqrt(m)))
    if side * side != m:
        raise ValueError(f"non-square QAM order {m} is not supported")
    half = int(np.log2(side))
    scale = np.sqrt(2.0 * (side * side - 1) / 3.0)
    points = np.empty(m, dtype=np.complex128)
    for gi in range(side):
        for gq in range(side):
            label = (_gray(gi) << half) | _gray(gq)
            level_i = 2 * gi - (side - 1)
            level_q = 2 * gq - (side - 1)
            points[label] = (level_i + 1j * level_q) / scale
    return points


def build_constellation(kind: str, m: int) -> Constellation:
    """Build a Gray-labeled constellation of the given kind and order."""
    if m < 2 or (m & (m - 1)) != 0:
        raise ValueError(f"constellation order must be a power of 2 and >= 2, got {m}")
    kind = kind.lower()
    if kind == PSK:
        points = _psk_points(m)
    elif kind == QAM:
        if m < 4:
            raise ValueError("QAM requires order >= 4")
        points = _qam_points(m)
    else:
        raise ValueError(f"unknown constellation kind {kind!r}")
    return Constellation(kind=kind, M=m, points=points, bits_per_symbol=int(np.log2(m)))


def bits_to_index(bits) -> int:
    """Interpret a bit sequence as an MSB-first integer."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def map_bits(c: Constellation, bits) -> complex:
    """Map log2(M) bits to the constellation point carrying that label."""
    if len(bits) != c.bits_per_symbol:
        raise ValueError(f"expected {c.bits_per_symbol} bits, got {len(bits)}")
    return complex(c.points[bits_to_index(bits)])

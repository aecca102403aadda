"""ZF and MMSE linear transmit precoders and the effective channel they form.

The ZF precoder is the Moore-Penrose construction H^H (H H^H)^+, which
reduces to the plain inverse whenever H H^H is nonsingular and stays
well-defined for rank-deficient shapes (e.g. more receive than transmit
antennas).  Precoders are power-normalized so that ||beta * P||_F^2 equals
the column count of P: on average the precoder neither amplifies nor
attenuates transmit power, and the receiver does NOT compensate beta.
That uncompensated power reshaping is exactly what degrades the BER of
precoded schemes.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

ZF = "zf"
MMSE = "mmse"
IDENTITY = "identity"

_SINGULAR_TOL = 1e-12


class SingularChannelError(np.linalg.LinAlgError):
    """All singular values of the channel are numerically zero; redraw it."""


@dataclass(frozen=True)
class Precoder:
    kind: str
    P: np.ndarray
    beta: float
    sigma2: Optional[float] = None

    @property
    def matrix(self) -> np.ndarray:
        """The power-normalized precoding matrix beta * P."""
        return self.beta * self.P


def _normalization(p: np.ndarray) -> float:
    fro2 = float(np.sum(np.abs(p) ** 2))
    if fro2 <= 0.0:
        raise SingularChannelError("precoder has zero Frobenius norm")
    return float(np.sqrt(p.shape[1] / fro2))


def identity_precoder(n_t: int) -> Precoder:
    return Precoder(kind=IDENTITY, P=np.eye(n_t, dtype=np.complex128), beta=1.0)


def zf_precoder(h: np.ndarray) -> Precoder:
    """Channel-inverting precoder H^H (H H^H)^+, power-normalized."""
    h = np.asarray(h, dtype=np.complex128)
    if np.linalg.norm(h) < _SINGULAR_TOL:
        raise SingularChannelError("channel is numerically zero")
    p = np.linalg.pinv(h)
    return Precoder(kind=ZF, P=p, beta=_normalization(p))


def mmse_precoder(h: np.ndarray, sigma2: float) -> Precoder:
    """Regularized inverse H^H (H H^H + sigma2 I)^-1, power-normalized."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    h = np.asarray(h, dtype=np.complex128)
    if sigma2 == 0.0:
        zf = zf_precoder(h)
        return Precoder(kind=MMSE, P=zf.P, beta=zf.beta, sigma2=0.0)
    n_r, n_t = h.shape
    if n_t <= n_r:
        # push-through identity keeps the inverted matrix small
        p = np.linalg.solve(h.conj().T @ h + sigma2 * np.eye(n_t), h.conj().T)
    else:
        p = h.conj().T @ np.linalg.inv(h @ h.conj().T + sigma2 * np.eye(n_r))
    return Precoder(kind=MMSE, P=p, beta=_normalization(p), sigma2=float(sigma2))


def effective_channel(h: np.ndarray, precoder: Precoder) -> np.ndarray:
    """H_b = H (beta * P), the channel seen by the detector."""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[1] != precoder.P.shape[0]:
        raise ValueError(
            f"channel has {h.shape[1]} columns but precoder expects {precoder.P.shape[0]}"
        )
    return h @ precoder.matrix


# -- batched helpers used by the Monte Carlo engine --------------------------

def inv2_batch(g: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a (..., 2, 2) stack."""
    a = g[..., 0, 0]
    b = g[..., 0, 1]
    c = g[..., 1, 0]
    d = g[..., 1, 1]
    det = a * d - b * c
    out = np.empty_like(g)
    out[..., 0, 0] = d
    out[..., 0, 1] = -b
    out[..., 1, 0] = -c
    out[..., 1, 1] = a
    return out / det[..., None, None]


def zf_precoder_batch(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized ZF precoders for a (B, n_r, n_t) channel stack.

    Returns (beta * P) with shape (B, n_t, n_r) and beta with shape (B,).
    """
    b, n_r, n_t = h.shape
    hh = np.conj(np.swapaxes(h, -1, -2))
    if n_t <= n_r:
        gram = hh @ h
        inv = inv2_batch(gram) if n_t == 2 else np.linalg.inv(gram)
        p = inv @ hh
    else:
        gram = h @ hh
        inv = inv2_batch(gram) if n_r == 2 else np.linalg.inv(gram)
        p = hh @ inv
    return _normalize_batch(p)


def mmse_precoder_batch(h: np.ndarray, sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """Normalized MMSE precoders for a (B, n_r, n_t) channel stack."""
    if sigma2 == 0.0:
        return zf_precoder_batch(h)
    b, n_r, n_t = h.shape
    hh = np.conj(np.swapaxes(h, -1, -2))
    if n_t <= n_r:
        gram = hh @ h + sigma2 * np.eye(n_t)
        inv = inv2_batch(gram) if n_t == 2 else np.linalg.inv(gram)
        p = inv @ hh
    else:
        gram = h @ hh + sigma2 * np.eye(n_r)
        inv = inv2_batch(gram) if n_r == 2 else np.linalg.inv(gram)
        p = hh @ inv
    return _normalize_batch(p)


def _normalize_batch(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fro2 = np.sum(np.abs(p) ** 2, axis=(-2, -1))
    beta = np.sqrt(p.shape[-1] / fro2)
    return p * beta[:, None, None], beta

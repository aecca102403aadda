"""Independent brute-force reference detectors used as test oracles.

These deliberately use plain Python loops over every hypothesis so they
share no code path with the vectorized detectors they check.  Ties break
toward the first hypothesis in enumeration order (strict improvement
required), matching the lexicographic tie-break contract.
"""

from itertools import product

import numpy as np


def naive_sm_detect(y, h_eff, points, index_count):
    """Exhaustive (antenna, symbol) search; returns (l, symbol_label)."""
    best = None
    best_metric = np.inf
    for l in range(index_count):
        for m, s in enumerate(points):
            metric = float(np.sum(np.abs(y - h_eff[:, l] * s) ** 2))
            if metric < best_metric:
                best_metric = metric
                best = (l, m)
    return best


def naive_stbcsm_detect(y, stack, points):
    """Exhaustive (codeword, symbol pair) search; returns (l, m1, m2)."""
    best = None
    best_metric = np.inf
    for l in range(stack.shape[0]):
        for m1, s1 in enumerate(points):
            for m2, s2 in enumerate(points):
                cand = stack[l] @ np.array([s1, s2])
                metric = float(np.sum(np.abs(y - cand) ** 2))
                if metric < best_metric:
                    best_metric = metric
                    best = (l, m1, m2)
    return best


def naive_vblast_detect(y, h, points, n_t):
    """Exhaustive joint search over all M^n_t vectors; returns label tuple."""
    best = None
    best_metric = np.inf
    for labels in product(range(len(points)), repeat=n_t):
        x = np.array([points[m] for m in labels]) / np.sqrt(n_t)
        metric = float(np.sum(np.abs(y - h @ x) ** 2))
        if metric < best_metric:
            best_metric = metric
            best = labels
    return best


def bits_of(value, width):
    return np.array([(value >> (width - 1 - b)) & 1 for b in range(width)],
                    dtype=np.uint8)

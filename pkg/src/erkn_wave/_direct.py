"""Direct-summation reference implementations (slow, for cross-checks only)."""
from __future__ import annotations

import numpy as np

from .spectral import mode_indices


def direct_convolution(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """O(K^2) double sum over all index pairs, reduced mod 2K."""
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("size mismatch")
    j = mode_indices(n // 2)
    out = np.zeros(n, dtype=complex)
    for k_pos in range(n):
        for l_pos in range(n):
            target = (j[k_pos] + j[l_pos]) % n
            out[target] += a[k_pos] * b[l_pos]
    return out


def direct_power(y: np.ndarray, p: int) -> np.ndarray:
    out = y
    for _ in range(p - 1):
        out = direct_convolution(out, y)
    return out


def direct_collocation(v: np.ndarray) -> np.ndarray:
    """``sum_j v_j exp(i j x_k)`` evaluated term by term, k in storage order."""
    K = v.shape[0] // 2
    j = mode_indices(K)
    x = np.pi * j / K
    return np.exp(1j * np.outer(x, j)) @ v

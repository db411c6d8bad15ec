"""8x8 forward/inverse DCT-II and coefficient (de)quantization.

T.81 normalization: a constant level-shifted block v transforms to DC = 8v.
With this scaling the transform matrix is orthonormal, so fdct preserves the
sum of squares exactly (up to float64 roundoff).
"""

from __future__ import annotations

import numpy as np

from ..numeric import round_half_away


def _dct_matrix() -> np.ndarray:
    u = np.arange(8).reshape(8, 1)
    x = np.arange(8).reshape(1, 8)
    m = 0.5 * np.cos((2 * x + 1) * u * np.pi / 16.0)
    m[0, :] *= 1.0 / np.sqrt(2.0)
    return m


_D = _dct_matrix()
_DT = _D.T.copy()


def _as_blocks(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(8, 8)
    return a


def fdct8x8(block: np.ndarray) -> np.ndarray:
    """2-D DCT-II of level-shifted 8x8 blocks; accepts flat 64 or (..., 8, 8) batches."""
    return _D @ _as_blocks(block) @ _DT


def idct8x8(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of fdct8x8; idct8x8(fdct8x8(x)) == x to float64 precision."""
    return _DT @ _as_blocks(coeffs) @ _D


def quantize(coeffs: np.ndarray, qt: np.ndarray) -> np.ndarray:
    """round(c/q) half away from zero, elementwise over natural-order blocks."""
    return round_half_away(np.asarray(coeffs, dtype=np.float64) / qt).astype(np.int32)


def dequantize(ints: np.ndarray, qt: np.ndarray) -> np.ndarray:
    """Reconstruct coefficients as i*q."""
    return np.asarray(ints, dtype=np.float64) * qt

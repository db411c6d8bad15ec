"""Full-range BT.601 RGB <-> YCbCr, rounded half away from zero, clamped to [0,255]."""

from __future__ import annotations

import numpy as np

from ..image import Image
from ..numeric import round_half_away

KR, KB = 0.299, 0.114
KG = 1.0 - KR - KB


def _finish(arr: np.ndarray) -> np.ndarray:
    return np.clip(round_half_away(arr), 0, 255).astype(np.uint8)


def rgb_to_ycbcr_planes(planes: np.ndarray) -> np.ndarray:
    r, g, b = planes.astype(np.float64)
    y = KR * r + KG * g + KB * b
    cb = 0.5 / (1.0 - KB) * (b - y) + 128.0
    cr = 0.5 / (1.0 - KR) * (r - y) + 128.0
    return np.stack([_finish(y), _finish(cb), _finish(cr)])


def ycbcr_to_rgb_planes(planes: np.ndarray) -> np.ndarray:
    y, cb, cr = planes.astype(np.float64)
    cb = cb - 128.0
    cr = cr - 128.0
    r = y + 2.0 * (1.0 - KR) * cr
    b = y + 2.0 * (1.0 - KB) * cb
    g = y - (2.0 * KR * (1.0 - KR) / KG) * cr - (2.0 * KB * (1.0 - KB) / KG) * cb
    return np.stack([_finish(r), _finish(g), _finish(b)])


def rgb_to_ycbcr(img: Image) -> Image:
    if img.channels != 3:
        raise ValueError("rgb_to_ycbcr needs a 3-channel image")
    return Image(rgb_to_ycbcr_planes(img.planes), 8)


def ycbcr_to_rgb(img: Image) -> Image:
    if img.channels != 3:
        raise ValueError("ycbcr_to_rgb needs a 3-channel image")
    return Image(ycbcr_to_rgb_planes(img.planes), 8)

"""Sensor-side compression stages: pixel binning, bit truncation, brightness restore.

Binning averages a block of neighboring pixels into one output pixel; truncation
drops the N least-significant bits by scaled rounding, so the image gets darker
and its swing shrinks by 2**N until the decoder multiplies it back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image, center_crop_to_multiple

BIN_MODES = ((1, 1), (2, 1), (2, 2), (4, 4))


@dataclass(frozen=True)
class AcquisitionConfig:
    """One point of the (binning, truncation, JPEG quality) grid."""

    bin_w: int = 1
    bin_h: int = 1
    truncate_bits: int = 0
    quality: int = 100

    def __post_init__(self):
        if (self.bin_w, self.bin_h) not in BIN_MODES:
            raise ValueError(f"bin mode {self.bin_w}x{self.bin_h} not in {{1x1, 2x1, 2x2, 4x4}}")
        if not 0 <= self.truncate_bits <= 3:
            raise ValueError(f"truncate_bits must be in [0,3], got {self.truncate_bits}")
        if not 70 <= self.quality <= 100:
            raise ValueError(f"quality must be in [70,100], got {self.quality}")

    @property
    def bin_mode(self) -> str:
        return f"{self.bin_w}x{self.bin_h}"

    @property
    def binned_pixels(self) -> int:
        return self.bin_w * self.bin_h

    @property
    def bitwidth(self) -> int:
        """Bits per sample leaving the sensor (8 - N)."""
        return 8 - self.truncate_bits


def parse_bin_mode(text: str) -> tuple[int, int]:
    """'2x2' -> (2, 2); only the supported modes are accepted."""
    parts = text.lower().split("x")
    if len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
        mode = (int(parts[0]), int(parts[1]))
        if mode in BIN_MODES:
            return mode
    raise ValueError(f"unsupported bin mode {text!r}; expected one of 1x1, 2x1, 2x2, 4x4")


def bin_average(img: Image, bin_w: int, bin_h: int) -> Image:
    """Average each bin_w x bin_h block into one pixel, rounding half away from zero.

    Dimensions must divide exactly; channels are binned independently and the
    bit depth is unchanged.
    """
    if (bin_w, bin_h) not in BIN_MODES:
        raise ValueError(f"bin mode {bin_w}x{bin_h} not in {{1x1, 2x1, 2x2, 4x4}}")
    if bin_w == 1 and bin_h == 1:
        return img
    c, h, w = img.planes.shape
    if w % bin_w or h % bin_h:
        raise ValueError(f"image {w}x{h} not divisible by bin {bin_w}x{bin_h}")
    blocks = img.planes.reshape(c, h // bin_h, bin_h, w // bin_w, bin_w)
    sums = blocks.sum(axis=(2, 4), dtype=np.uint32)
    k = bin_w * bin_h
    # round(S/k) half away from zero, exactly, in integers: floor((2S + k) / 2k)
    binned = ((2 * sums + k) // (2 * k)).astype(np.uint8)
    return Image(binned, img.bit_depth)


def truncate_bits(img: Image, n: int) -> Image:
    """Drop the n LSBs via round(p * 2**-n), half away from zero, clamped to 8-n bits.

    round(255 * 2**-3) = 32 would overflow 5 bits, hence the clamp.
    """
    if not 0 <= n <= 3:
        raise ValueError(f"truncate_bits must be in [0,3], got {n}")
    if img.bit_depth != 8:
        raise ValueError(f"truncation expects an 8-bit image, got bit_depth {img.bit_depth}")
    if n == 0:
        return img
    p = img.planes.astype(np.uint16)
    t = (p + (1 << (n - 1))) >> n
    limit = (1 << (8 - n)) - 1
    return Image(np.minimum(t, limit).astype(np.uint8), 8 - n)


def restore_brightness(img: Image, n: int) -> Image:
    """Undo truncation darkening: p * 2**n, clamped to 255. Output is 8-bit."""
    if not 0 <= n <= 3:
        raise ValueError(f"truncate_bits must be in [0,3], got {n}")
    if n == 0:
        return Image(img.planes, 8)
    p = img.planes.astype(np.uint16) << n
    return Image(np.minimum(p, 255).astype(np.uint8), 8)


def acquire(img: Image, cfg: AcquisitionConfig) -> bytes:
    """Stages 1-3: center-crop to the bin grid, bin, truncate, JPEG-encode.

    Truncated samples sit in the low bits of 8-bit storage when fed to the
    encoder. Returns the JPEG byte stream.
    """
    from .jpeg import jpeg_encode

    if img.bit_depth != 8:
        raise ValueError("acquire expects an 8-bit image")
    cropped = center_crop_to_multiple(img, cfg.bin_w, cfg.bin_h)
    binned = bin_average(cropped, cfg.bin_w, cfg.bin_h)
    truncated = truncate_bits(binned, cfg.truncate_bits)
    storage = Image(truncated.planes, 8)  # low-bit placement in 8-bit storage
    return jpeg_encode(storage, cfg.quality)

"""Baseline JPEG coding tables: quantization bases, quality scaling, zigzag, Huffman.

Quantization bases and Huffman BITS/HUFFVAL lists are the ITU-T T.81 Annex K
sample tables; the quality knob uses the de-facto IJG scaling so Q in [1,100]
means the same thing it does everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Natural index visited at each step of the 8x8 zigzag scan.
ZIGZAG_ORDER = np.array([
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
], dtype=np.intp)

BASE_LUMA_QT = np.array([
    16,  11,  10,  16,  24,  40,  51,  61,
    12,  12,  14,  19,  26,  58,  60,  55,
    14,  13,  16,  24,  40,  57,  69,  56,
    14,  17,  22,  29,  51,  87,  80,  62,
    18,  22,  37,  56,  68, 109, 103,  77,
    24,  35,  55,  64,  81, 104, 113,  92,
    49,  64,  78,  87, 103, 121, 120, 101,
    72,  92,  95,  98, 112, 100, 103,  99,
], dtype=np.int64)  # natural (row-major) order

BASE_CHROMA_QT = np.array([
    17,  18,  24,  47,  99,  99,  99,  99,
    18,  21,  26,  66,  99,  99,  99,  99,
    24,  26,  56,  99,  99,  99,  99,  99,
    47,  66,  99,  99,  99,  99,  99,  99,
    99,  99,  99,  99,  99,  99,  99,  99,
    99,  99,  99,  99,  99,  99,  99,  99,
    99,  99,  99,  99,  99,  99,  99,  99,
    99,  99,  99,  99,  99,  99,  99,  99,
], dtype=np.int64)


def zigzag(block):
    """Reorder natural (row-major) 64 coefficients into zigzag scan order."""
    arr = np.asarray(block)
    flat = arr.reshape(arr.shape[: arr.ndim - (2 if arr.shape[-1] == 8 else 1)] + (64,))
    return flat[..., ZIGZAG_ORDER]


def inverse_zigzag(scan):
    """Undo zigzag(): scan-order 64 coefficients back to natural order."""
    arr = np.asarray(scan)
    out = np.empty_like(arr)
    out[..., ZIGZAG_ORDER] = arr
    return out


@dataclass(frozen=True)
class QuantTable:
    """64 quantizer steps in [1,255], stored in zigzag order as they go on the wire."""

    values: tuple
    role: str  # "luma" or "chroma"

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) != 64:
            raise ValueError(f"quant table needs 64 entries, got {len(vals)}")
        if any(v < 1 or v > 255 for v in vals):
            raise ValueError("quant table entries must be in [1,255]")
        object.__setattr__(self, "values", vals)

    def natural(self) -> np.ndarray:
        """8x8 float array in natural order, for quantize()/dequantize()."""
        flat = np.empty(64, dtype=np.float64)
        flat[ZIGZAG_ORDER] = self.values
        return flat.reshape(8, 8)


def quality_to_tables(quality: int) -> tuple[QuantTable, QuantTable]:
    """IJG quality mapping: scale the base tables, floor, clamp to [1,255].

    Q=50 reproduces the base tables exactly; Q=100 gives all-ones tables.
    """
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1,100], got {quality}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    tables = []
    for base, role in ((BASE_LUMA_QT, "luma"), (BASE_CHROMA_QT, "chroma")):
        scaled = np.clip((base * scale + 50) // 100, 1, 255)
        tables.append(QuantTable(tuple(int(v) for v in scaled[ZIGZAG_ORDER]), role))
    return tables[0], tables[1]


@dataclass(frozen=True)
class HuffmanSpec:
    """Canonical Huffman table: BITS (16 code-length counts) plus HUFFVAL symbols."""

    bits: tuple
    values: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        values = tuple(int(v) for v in self.values)
        if len(bits) != 16:
            raise ValueError("BITS must have 16 entries")
        if sum(bits) != len(values):
            raise ValueError(f"BITS promises {sum(bits)} symbols, HUFFVAL has {len(values)}")
        if sum(bits) > 256:
            raise ValueError("too many Huffman symbols")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "values", values)

    def codes(self) -> dict:
        """symbol -> (code, length), canonical T.81 assignment."""
        out = {}
        code = 0
        k = 0
        for length in range(1, 17):
            for _ in range(self.bits[length - 1]):
                if code >= (1 << length):
                    raise ValueError("Huffman BITS not prefix-decodable")
                out[self.values[k]] = (code, length)
                code += 1
                k += 1
            code <<= 1
        return out

    def build_lut(self) -> np.ndarray:
        """65536-entry decode table: 16-bit window -> (symbol << 5) | code length.

        Zero marks a bit pattern that is not a valid code prefix.
        """
        lut = np.zeros(1 << 16, dtype=np.int16)
        for symbol, (code, length) in self.codes().items():
            start = code << (16 - length)
            lut[start : start + (1 << (16 - length))] = (symbol << 5) | length
        return lut


# Annex K sample Huffman tables (the ones every baseline encoder ships).
STD_DC_LUMA = HuffmanSpec(
    bits=(0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0),
    values=tuple(range(12)),
)
STD_DC_CHROMA = HuffmanSpec(
    bits=(0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0),
    values=tuple(range(12)),
)
STD_AC_LUMA = HuffmanSpec(
    bits=(0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D),
    values=(
        0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12,
        0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
        0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
        0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
        0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16,
        0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
        0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
        0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
        0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
        0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
        0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
        0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
        0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
        0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
        0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
        0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
        0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4,
        0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
        0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA,
        0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
        0xF9, 0xFA,
    ),
)
STD_AC_CHROMA = HuffmanSpec(
    bits=(0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77),
    values=(
        0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21,
        0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
        0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
        0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
        0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34,
        0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
        0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38,
        0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
        0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
        0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
        0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
        0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
        0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96,
        0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
        0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
        0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
        0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2,
        0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
        0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9,
        0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
        0xF9, 0xFA,
    ),
)


@lru_cache(maxsize=16)
def _std_lut(which: str) -> np.ndarray:
    spec = {
        "dc_luma": STD_DC_LUMA, "dc_chroma": STD_DC_CHROMA,
        "ac_luma": STD_AC_LUMA, "ac_chroma": STD_AC_CHROMA,
    }[which]
    return spec.build_lut()

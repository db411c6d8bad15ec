"""Baseline sequential JFIF encoder.

Always 4:4:4 (so the quality knob, truncation and binning are the only loss
sources), fixed Annex K Huffman tables, float64 DCT, half-away quantization.
Edge blocks are padded by replicating the last row/column.
"""

from __future__ import annotations

import struct

import numpy as np

from ..image import Image
from .color import rgb_to_ycbcr_planes
from .dct import fdct8x8, quantize
from .tables import (
    STD_AC_CHROMA,
    STD_AC_LUMA,
    STD_DC_CHROMA,
    STD_DC_LUMA,
    ZIGZAG_ORDER,
    quality_to_tables,
)

SOI, APP0, DQT, SOF0, DHT, SOS, EOI = 0xD8, 0xE0, 0xDB, 0xC0, 0xC4, 0xDA, 0xD9


class _BitWriter:
    """MSB-first bit accumulator with 0xFF byte stuffing."""

    def __init__(self):
        self.out = bytearray()
        self.buf = 0
        self.nbits = 0

    def put(self, bits: int, n: int) -> None:
        if n == 0:
            return
        self.buf = (self.buf << n) | (bits & ((1 << n) - 1))
        self.nbits += n
        while self.nbits >= 8:
            byte = (self.buf >> (self.nbits - 8)) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0x00)
            self.nbits -= 8
        self.buf &= (1 << self.nbits) - 1

    def finish(self) -> bytes:
        if self.nbits:
            self.put(0xFF, 8 - self.nbits)  # pad final byte with 1-bits
        return bytes(self.out)


def _segment(marker: int, payload: bytes) -> bytes:
    return bytes([0xFF, marker]) + struct.pack(">H", len(payload) + 2) + payload


def _plane_to_scan_blocks(plane: np.ndarray, qt_natural: np.ndarray) -> np.ndarray:
    """Pad, level-shift, DCT and quantize one plane -> (nblocks, 64) zigzag ints."""
    h, w = plane.shape
    ph = (-h) % 8
    pw = (-w) % 8
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    hh, ww = plane.shape
    blocks = plane.reshape(hh // 8, 8, ww // 8, 8).transpose(0, 2, 1, 3).reshape(-1, 8, 8)
    coeffs = fdct8x8(blocks.astype(np.float64) - 128.0)
    quantized = quantize(coeffs, qt_natural)
    return quantized.reshape(-1, 64)[:, ZIGZAG_ORDER]


def _encode_block(w: _BitWriter, zz: list, pred: int, dc_codes: dict, ac_codes: dict) -> int:
    dc = zz[0]
    diff = dc - pred
    s = abs(diff).bit_length()
    code, length = dc_codes[s]
    w.put(code, length)
    if s:
        w.put(diff if diff > 0 else diff + (1 << s) - 1, s)

    prev = 0
    for k in range(1, 64):
        v = zz[k]
        if v == 0:
            continue
        run = k - prev - 1
        while run > 15:
            code, length = ac_codes[0xF0]  # ZRL: 16 zeros
            w.put(code, length)
            run -= 16
        s = abs(v).bit_length()
        code, length = ac_codes[(run << 4) | s]
        w.put(code, length)
        w.put(v if v > 0 else v + (1 << s) - 1, s)
        prev = k
    if prev != 63:
        code, length = ac_codes[0x00]  # EOB
        w.put(code, length)
    return dc


def jpeg_encode(img: Image, quality: int) -> bytes:
    """Encode an 8-bit 1- or 3-channel image to a baseline JFIF byte stream."""
    if img.bit_depth != 8:
        raise ValueError("jpeg_encode expects an 8-bit image")
    luma_qt, chroma_qt = quality_to_tables(quality)

    if img.channels == 1:
        planes = [img.planes[0]]
        qts = [luma_qt]
        comp_qt_ids = [0]
    else:
        ycc = rgb_to_ycbcr_planes(img.planes)
        planes = [ycc[0], ycc[1], ycc[2]]
        qts = [luma_qt, chroma_qt, chroma_qt]
        comp_qt_ids = [0, 1, 1]

    scan_blocks = [
        _plane_to_scan_blocks(p, qt.natural()).tolist() for p, qt in zip(planes, qts)
    ]

    out = bytearray()
    out += bytes([0xFF, SOI])
    out += _segment(APP0, b"JFIF\x00\x01\x01\x00" + struct.pack(">HH", 1, 1) + b"\x00\x00")

    dqt_payload = bytes([0]) + bytes(luma_qt.values)
    if img.channels == 3:
        dqt_payload += bytes([1]) + bytes(chroma_qt.values)
    out += _segment(DQT, dqt_payload)

    sof = struct.pack(">BHHB", 8, img.height, img.width, img.channels)
    for i in range(img.channels):
        sof += bytes([i + 1, 0x11, comp_qt_ids[i]])
    out += _segment(SOF0, sof)

    dht_payload = bytes([0x00]) + bytes(STD_DC_LUMA.bits) + bytes(STD_DC_LUMA.values)
    dht_payload += bytes([0x10]) + bytes(STD_AC_LUMA.bits) + bytes(STD_AC_LUMA.values)
    if img.channels == 3:
        dht_payload += bytes([0x01]) + bytes(STD_DC_CHROMA.bits) + bytes(STD_DC_CHROMA.values)
        dht_payload += bytes([0x11]) + bytes(STD_AC_CHROMA.bits) + bytes(STD_AC_CHROMA.values)
    out += _segment(DHT, dht_payload)

    sos = bytes([img.channels])
    for i in range(img.channels):
        tbl = 0x00 if i == 0 else 0x11
        sos += bytes([i + 1, tbl])
    sos += bytes([0, 63, 0])
    out += _segment(SOS, sos)

    dc_codes_l = STD_DC_LUMA.codes()
    ac_codes_l = STD_AC_LUMA.codes()
    dc_codes_c = STD_DC_CHROMA.codes()
    ac_codes_c = STD_AC_CHROMA.codes()
    comp_codes = [(dc_codes_l, ac_codes_l)] + [(dc_codes_c, ac_codes_c)] * (img.channels - 1)

    writer = _BitWriter()
    preds = [0] * img.channels
    nblocks = len(scan_blocks[0])
    for i in range(nblocks):
        for c in range(img.channels):
            dc_codes, ac_codes = comp_codes[c]
            preds[c] = _encode_block(writer, scan_blocks[c][i], preds[c], dc_codes, ac_codes)
    out += writer.finish()
    out += bytes([0xFF, EOI])
    return bytes(out)

"""Baseline sequential JFIF/JPEG decoder.

Accepts Huffman-coded 8-bit streams, grayscale or YCbCr, 4:4:4 or 4:2:0
(so streams from mainstream encoders decode too, not just our own 4:4:4).
Failure modes are reported distinctly: malformed marker structure, invalid
Huffman codes, and truncated entropy data / missing EOI.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..image import Image
from ..numeric import round_half_away
from .color import ycbcr_to_rgb_planes
from .dct import dequantize, idct8x8
from .tables import ZIGZAG_ORDER, HuffmanSpec, QuantTable


class JpegError(ValueError):
    """Base class for decode failures."""


class MalformedStream(JpegError):
    """Marker/segment structure violates the baseline format."""


class UnsupportedJpeg(JpegError):
    """Well-formed but outside the supported baseline subset."""


class BadHuffmanCode(JpegError):
    """Entropy segment contains a bit pattern that is not a valid code."""


class TruncatedStream(JpegError):
    """Stream ends before the entropy data or the EOI marker."""


SOI, EOI, SOS, DQT, DHT, DRI, COM = 0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD, 0xFE
SOF0 = 0xC0
_SOF_UNSUPPORTED = {0xC1, 0xC2, 0xC3, 0xC5, 0xC6, 0xC7, 0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF}
_RST = set(range(0xD0, 0xD8))


@dataclass
class _Component:
    comp_id: int
    h: int
    v: int
    tq: int
    dc_table: int = 0
    ac_table: int = 0


class _BitReader:
    """MSB-first reader over the byte-stuffed entropy segment.

    Stops feeding at the first marker (0xFF followed by anything but 0x00);
    `take` past the real bits raises TruncatedStream.
    """

    __slots__ = ("data", "pos", "buf", "nbits", "hit_marker")

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos
        self.buf = 0
        self.nbits = 0
        self.hit_marker = False

    def _fill(self) -> None:
        data, pos = self.data, self.pos
        n = len(data)
        while self.nbits <= 24 and not self.hit_marker:
            if pos >= n:
                self.hit_marker = True  # ran off the end: no more entropy bytes
                break
            byte = data[pos]
            if byte == 0xFF:
                if pos + 1 < n and data[pos + 1] == 0x00:
                    pos += 2
                else:
                    self.hit_marker = True
                    break
            else:
                pos += 1
            self.buf = (self.buf << 8) | byte
            self.nbits += 8
        self.pos = pos

    def peek16(self) -> int:
        if self.nbits < 16:
            self._fill()
        if self.nbits >= 16:
            return (self.buf >> (self.nbits - 16)) & 0xFFFF
        return (self.buf << (16 - self.nbits)) & 0xFFFF

    def take(self, n: int) -> int:
        if n == 0:
            return 0
        if self.nbits < n:
            self._fill()
            if self.nbits < n:
                raise TruncatedStream("truncated entropy segment")
        self.nbits -= n
        v = (self.buf >> self.nbits) & ((1 << n) - 1)
        self.buf &= (1 << self.nbits) - 1
        return v

    def read_symbol(self, lut: np.ndarray) -> int:
        packed = int(lut[self.peek16()])
        if packed == 0:
            if self.hit_marker and self.nbits < 16:
                raise TruncatedStream("truncated entropy segment")
            raise BadHuffmanCode("invalid Huffman code in entropy segment")
        self.take(packed & 31)
        return packed >> 5


def _extend(v: int, s: int) -> int:
    """T.81 EXTEND: map s received bits back to a signed coefficient."""
    if s and v < (1 << (s - 1)):
        return v - (1 << s) + 1
    return v


def _u16(data: bytes, pos: int) -> int:
    if pos + 2 > len(data):
        raise TruncatedStream("stream ends inside a segment header")
    return (data[pos] << 8) | data[pos + 1]


def jpeg_decode(stream: bytes) -> Image:
    """Decode a baseline JPEG byte stream to an 8-bit Image (1 or 3 channels)."""
    data = bytes(stream)
    if len(data) < 2 or data[0] != 0xFF or data[1] != SOI:
        raise MalformedStream("missing SOI marker")

    quant: dict[int, np.ndarray] = {}
    luts: dict[tuple[int, int], np.ndarray] = {}
    frame = None  # (height, width, [components])
    pos = 2

    while True:
        # fill bytes: any number of 0xFF before the marker code
        if pos >= len(data):
            raise TruncatedStream("truncated stream: no SOS/EOI")
        if data[pos] != 0xFF:
            raise MalformedStream(f"expected marker at byte {pos}, found 0x{data[pos]:02X}")
        while pos < len(data) and data[pos] == 0xFF:
            pos += 1
        if pos >= len(data):
            raise TruncatedStream("truncated stream: dangling 0xFF")
        marker = data[pos]
        pos += 1

        if marker == EOI:
            raise MalformedStream("EOI before any scan")
        if marker in _SOF_UNSUPPORTED:
            raise UnsupportedJpeg(f"unsupported SOF marker 0xFF{marker:02X} (baseline only)")
        if marker in _RST:
            raise MalformedStream("restart marker outside entropy segment")

        seg_len = _u16(data, pos)
        if seg_len < 2:
            raise MalformedStream(f"segment length {seg_len} < 2")
        body_start = pos + 2
        body_end = pos + seg_len
        if body_end > len(data):
            raise TruncatedStream("stream ends inside a segment")
        body = data[body_start:body_end]
        pos = body_end

        if marker == SOF0:
            frame = _parse_sof(body)
        elif marker == DQT:
            _parse_dqt(body, quant)
        elif marker == DHT:
            _parse_dht(body, luts)
        elif marker == DRI:
            interval = _u16(body, 0)
            if interval != 0:
                raise UnsupportedJpeg("restart intervals not supported")
        elif marker == SOS:
            if frame is None:
                raise MalformedStream("SOS before SOF0")
            comps = _parse_sos(body, frame[2])
            planes, pos = _decode_scan(data, pos, frame, comps, quant, luts)
            _expect_eoi(data, pos)
            if len(planes) == 1:
                return Image(planes[0][np.newaxis], 8)
            return Image(ycbcr_to_rgb_planes(np.stack(planes)), 8)
        elif 0xE0 <= marker <= 0xEF or marker == COM:
            continue  # APPn / comment: metadata only
        else:
            raise MalformedStream(f"unexpected marker 0xFF{marker:02X}")


def _parse_sof(body: bytes) -> tuple:
    if len(body) < 6:
        raise MalformedStream("SOF0 segment too short")
    precision = body[0]
    if precision != 8:
        raise UnsupportedJpeg(f"sample precision {precision} (only 8-bit supported)")
    height = (body[1] << 8) | body[2]
    width = (body[3] << 8) | body[4]
    ncomp = body[5]
    if height < 1 or width < 1:
        raise MalformedStream("zero frame dimension")
    if ncomp not in (1, 3):
        raise UnsupportedJpeg(f"{ncomp}-component streams not supported")
    if len(body) != 6 + 3 * ncomp:
        raise MalformedStream("SOF0 length does not match component count")
    comps = []
    for i in range(ncomp):
        cid, hv, tq = body[6 + 3 * i : 9 + 3 * i]
        comps.append(_Component(cid, hv >> 4, hv & 15, tq))
    if ncomp == 3:
        hv = [(c.h, c.v) for c in comps]
        if hv != [(1, 1), (1, 1), (1, 1)] and hv != [(2, 2), (1, 1), (1, 1)]:
            raise UnsupportedJpeg(f"sampling factors {hv} (only 4:4:4 and 4:2:0 supported)")
    return height, width, comps


def _parse_dqt(body: bytes, quant: dict) -> None:
    pos = 0
    while pos < len(body):
        pq = body[pos] >> 4
        tq = body[pos] & 15
        if pq != 0:
            raise UnsupportedJpeg("16-bit quantization tables not supported")
        if pos + 65 > len(body):
            raise MalformedStream("DQT segment too short")
        try:
            table = QuantTable(tuple(body[pos + 1 : pos + 65]), "luma" if tq == 0 else "chroma")
        except ValueError as e:
            raise MalformedStream(f"bad quantization table: {e}") from e
        quant[tq] = table.natural()
        pos += 65
    if pos != len(body):
        raise MalformedStream("trailing bytes in DQT segment")


def _parse_dht(body: bytes, luts: dict) -> None:
    pos = 0
    while pos < len(body):
        tc = body[pos] >> 4
        th = body[pos] & 15
        if tc > 1:
            raise MalformedStream(f"bad Huffman table class {tc}")
        if pos + 17 > len(body):
            raise MalformedStream("DHT segment too short")
        bits = tuple(body[pos + 1 : pos + 17])
        n = sum(bits)
        if pos + 17 + n > len(body):
            raise MalformedStream("DHT segment too short for its symbols")
        values = tuple(body[pos + 17 : pos + 17 + n])
        try:
            luts[(tc, th)] = HuffmanSpec(bits, values).build_lut()
        except ValueError as e:
            raise MalformedStream(f"bad Huffman table: {e}") from e
        pos += 17 + n
    if pos != len(body):
        raise MalformedStream("trailing bytes in DHT segment")


def _parse_sos(body: bytes, frame_comps: list) -> list:
    if len(body) < 1:
        raise MalformedStream("empty SOS segment")
    ns = body[0]
    if ns != len(frame_comps):
        raise UnsupportedJpeg("multi-scan streams not supported (scan must cover all components)")
    if len(body) != 1 + 2 * ns + 3:
        raise MalformedStream("SOS length does not match component count")
    by_id = {c.comp_id: c for c in frame_comps}
    scan = []
    for i in range(ns):
        cs, tables = body[1 + 2 * i], body[2 + 2 * i]
        if cs not in by_id:
            raise MalformedStream(f"scan references unknown component id {cs}")
        comp = by_id[cs]
        comp.dc_table = tables >> 4
        comp.ac_table = tables & 15
        scan.append(comp)
    ss, se, ahal = body[1 + 2 * ns : 4 + 2 * ns]
    if (ss, se, ahal) != (0, 63, 0):
        raise UnsupportedJpeg("spectral selection / successive approximation not supported")
    return scan


def _decode_scan(data, pos, frame, comps, quant, luts):
    height, width, _ = frame
    ncomp = len(comps)
    # Single-component scans are non-interleaved: sampling factors do not apply.
    if ncomp == 1:
        hmax = vmax = 1
        factors = [(1, 1)]
    else:
        hmax = max(c.h for c in comps)
        vmax = max(c.v for c in comps)
        factors = [(c.h, c.v) for c in comps]

    mcus_x = -(-width // (8 * hmax))
    mcus_y = -(-height // (8 * vmax))

    coeff = []
    for (h, v) in factors:
        coeff.append(np.zeros((mcus_y * v, mcus_x * h, 64), dtype=np.int32))
    for c in comps:
        if (0, c.dc_table) not in luts or (1, c.ac_table) not in luts:
            raise MalformedStream(f"scan uses undefined Huffman table for component {c.comp_id}")
        if c.tq not in quant:
            raise MalformedStream(f"scan uses undefined quantization table {c.tq}")

    reader = _BitReader(data, pos)
    preds = [0] * ncomp
    for my in range(mcus_y):
        for mx in range(mcus_x):
            for ci, comp in enumerate(comps):
                h, v = factors[ci]
                dc_lut = luts[(0, comp.dc_table)]
                ac_lut = luts[(1, comp.ac_table)]
                for by in range(v):
                    for bx in range(h):
                        preds[ci] = _decode_block(
                            reader, dc_lut, ac_lut, preds[ci],
                            coeff[ci][my * v + by, mx * h + bx],
                        )

    planes = []
    for ci, comp in enumerate(comps):
        h, v = factors[ci]
        qt = quant[comp.tq]
        blocks_y, blocks_x, _ = coeff[ci].shape
        natural = np.zeros_like(coeff[ci])
        natural[:, :, ZIGZAG_ORDER] = coeff[ci]
        spatial = idct8x8(dequantize(natural.reshape(-1, 8, 8), qt)) + 128.0
        spatial = np.clip(round_half_away(spatial), 0, 255).astype(np.uint8)
        plane = (
            spatial.reshape(blocks_y, blocks_x, 8, 8)
            .transpose(0, 2, 1, 3)
            .reshape(blocks_y * 8, blocks_x * 8)
        )
        comp_h = -(-height * v // vmax)
        comp_w = -(-width * h // hmax)
        plane = plane[:comp_h, :comp_w]
        if h != hmax or v != vmax:
            plane = _upsample_2x2(plane)
        planes.append(plane[:height, :width])

    # consume any pad bits left in the reader, then land on the next marker
    return planes, reader.pos


def _upsample_2x2(plane: np.ndarray) -> np.ndarray:
    """Triangle-filter 2x chroma upsampling (libjpeg's "fancy" h2v2 kernel).

    Each output sample is (9*nearest + 3*next_h + 3*next_v + diag)/16 with
    edge clamping, computed as two 3:1 passes with libjpeg's exact rounding.
    """
    ph, pw = plane.shape
    rows = np.arange(2 * ph)
    near = rows >> 1
    far = np.clip(np.where(rows & 1, near + 1, near - 1), 0, ph - 1)
    colsum = 3 * plane[near].astype(np.uint16) + plane[far]  # vertical pass, x4 scale

    cols = np.arange(2 * pw)
    near = cols >> 1
    far = np.clip(np.where(cols & 1, near + 1, near - 1), 0, pw - 1)
    rounding = np.where(cols & 1, 7, 8).astype(np.uint16)
    out = (3 * colsum[:, near].astype(np.uint32) + colsum[:, far] + rounding) >> 4
    return out.astype(np.uint8)


def _decode_block(reader, dc_lut, ac_lut, pred, out) -> int:
    s = reader.read_symbol(dc_lut)
    if s > 11:
        raise MalformedStream(f"DC category {s} out of range")
    diff = _extend(reader.take(s), s) if s else 0
    dc = pred + diff
    out[0] = dc
    k = 1
    while k < 64:
        rs = reader.read_symbol(ac_lut)
        r, s = rs >> 4, rs & 15
        if s == 0:
            if rs == 0x00:  # EOB
                break
            if rs == 0xF0:  # ZRL
                k += 16
                continue
            raise MalformedStream(f"invalid AC run/size symbol 0x{rs:02X}")
        k += r
        if k > 63:
            raise MalformedStream("AC coefficient index past end of block")
        out[k] = _extend(reader.take(s), s)
        k += 1
    return dc


def _expect_eoi(data: bytes, pos: int) -> None:
    if pos >= len(data):
        raise TruncatedStream("truncated stream: missing EOI")
    if data[pos] != 0xFF:
        raise MalformedStream(f"expected marker after entropy data, found 0x{data[pos]:02X}")
    while pos < len(data) and data[pos] == 0xFF:
        pos += 1
    if pos >= len(data):
        raise TruncatedStream("truncated stream: missing EOI")
    if data[pos] != EOI:
        raise MalformedStream(f"expected EOI, found marker 0xFF{data[pos]:02X}")

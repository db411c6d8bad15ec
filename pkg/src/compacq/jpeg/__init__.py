"""Self-contained baseline JPEG codec with quality-factor control."""

from .color import rgb_to_ycbcr, ycbcr_to_rgb
from .dct import dequantize, fdct8x8, idct8x8, quantize
from .decoder import (
    BadHuffmanCode,
    JpegError,
    MalformedStream,
    TruncatedStream,
    UnsupportedJpeg,
    jpeg_decode,
)
from .encoder import jpeg_encode
from .tables import HuffmanSpec, QuantTable, inverse_zigzag, quality_to_tables, zigzag

__all__ = [
    "BadHuffmanCode",
    "HuffmanSpec",
    "JpegError",
    "MalformedStream",
    "QuantTable",
    "TruncatedStream",
    "UnsupportedJpeg",
    "dequantize",
    "fdct8x8",
    "idct8x8",
    "inverse_zigzag",
    "jpeg_decode",
    "jpeg_encode",
    "quality_to_tables",
    "quantize",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "zigzag",
]

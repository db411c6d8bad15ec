"""Stage 6: bicubic upscaling and the DRCAS residual-network forward pass.

The network is pre-upsampling: it runs at full resolution on the bicubic
image and predicts only a residual correction, so the all-zero model is
exactly the bicubic baseline and the anisotropic 2x1 mode needs no learned
upsampler. Tensors are float32 arrays shaped (channels, height, width).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .image import Image
from .numeric import round_half_away

SCALE_MODES = ((1, 1), (2, 1), (2, 2), (4, 4))
DEFAULT_CHANNELS = 64
DEFAULT_BLOCKS = 6

DRCS_MAGIC = b"DRCS"
DRCS_VERSION = 1


# ---------------------------------------------------------------------------
# Bicubic interpolation (Catmull-Rom kernel, a = -0.5, center-aligned phase)
# ---------------------------------------------------------------------------

_A = -0.5


def _cubic_kernel(t: np.ndarray) -> np.ndarray:
    """Piecewise cubic convolution weight; W(0)=1, W(1)=W(2)=0, sums to 1."""
    t = np.abs(t)
    t2 = t * t
    t3 = t2 * t
    near = (_A + 2.0) * t3 - (_A + 3.0) * t2 + 1.0
    far = _A * t3 - 5.0 * _A * t2 + 8.0 * _A * t - 4.0 * _A
    return np.where(t <= 1.0, near, np.where(t < 2.0, far, 0.0))


def _axis_taps(n_in: int, scale: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-output-sample source indices (n_out, 4) and kernel weights (n_out, 4).

    Output center i maps to (i + 0.5)/scale - 0.5 in input coordinates; taps
    outside the image clamp to the border sample.
    """
    n_out = n_in * scale
    src = (np.arange(n_out) + 0.5) / scale - 0.5
    base = np.floor(src).astype(np.int64)
    frac = src - base
    offsets = np.arange(-1, 3)
    idx = base[:, None] + offsets[None, :]
    weights = _cubic_kernel(frac[:, None] - offsets[None, :])
    return np.clip(idx, 0, n_in - 1), weights


def bicubic_upscale(img: Image, sx: int, sy: int) -> Image:
    """Upscale by integer factors (sx, sy); real-valued kernel, then round+clamp."""
    if sx < 1 or sy < 1:
        raise ValueError(f"scale factors must be >= 1, got ({sx}, {sy})")
    if sx == 1 and sy == 1:
        return img
    planes = img.planes.astype(np.float64)
    if sy > 1:
        idx, wts = _axis_taps(planes.shape[1], sy)
        planes = (planes[:, idx, :] * wts[None, :, :, None]).sum(axis=2)
    if sx > 1:
        idx, wts = _axis_taps(planes.shape[2], sx)
        planes = (planes[:, :, idx] * wts[None, None, :, :]).sum(axis=3)
    out = np.clip(round_half_away(planes), 0, 255).astype(np.uint8)
    return Image(out, 8)


# ---------------------------------------------------------------------------
# Convolution engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvLayer:
    """3x3 (by default) convolution weights: (out, in, kh, kw) float32 + bias (out,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float32)
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if w.ndim != 4:
            raise ValueError(f"weights must be (out, in, kh, kw), got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias shape {b.shape} does not match {w.shape[0]} output channels")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("non-finite weight")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def param_count(self) -> int:
        return self.weights.size + self.bias.size


_CONV_BAND_BYTES = 256 * 1024 * 1024  # cap on the per-band im2col buffer


def conv2d(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Same-padded stride-1 cross-correlation (no kernel flip) plus bias.

    im2col + one fat matmul per horizontal band: BLAS sees a deep inner
    dimension (cin*kh*kw) and the column buffer stays bounded on large images.
    """
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 3:
        raise ValueError(f"input must be (channels, h, w), got shape {x.shape}")
    cin, h, w = x.shape
    if cin != layer.in_channels:
        raise ValueError(f"input has {cin} channels, layer expects {layer.in_channels}")
    cout = layer.out_channels
    kh, kw = layer.weights.shape[2], layer.weights.shape[3]
    ph, pw = kh // 2, kw // 2
    padded = np.zeros((cin, h + kh - 1, w + kw - 1), dtype=np.float32)
    padded[:, ph : ph + h, pw : pw + w] = x

    k = cin * kh * kw
    wmat = layer.weights.reshape(cout, k)
    out = np.empty((cout, h, w), dtype=np.float32)
    band = max(1, _CONV_BAND_BYTES // (k * w * 4))
    for y0 in range(0, h, band):
        y1 = min(y0 + band, h)
        windows = np.lib.stride_tricks.sliding_window_view(
            padded[:, y0 : y1 + kh - 1, :], (kh, kw), axis=(1, 2))
        cols = windows.transpose(0, 3, 4, 1, 2).reshape(k, (y1 - y0) * w)
        out[:, y0:y1, :] = (wmat @ cols).reshape(cout, y1 - y0, w)
    out += layer.bias[:, None, None]
    return out


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def resblock_forward(x: np.ndarray, conv1: ConvLayer, conv2: ConvLayer) -> np.ndarray:
    """relu(conv2(relu(conv1(x))) + x): original-ResNet block without batch norm."""
    return relu(conv2d(relu(conv2d(x, conv1)), conv2) + x)


# ---------------------------------------------------------------------------
# DRCAS model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DrcasModel:
    """Fixed-topology residual restorer: head conv, R residual blocks, tail conv."""

    scale_x: int
    scale_y: int
    head: ConvLayer
    blocks: tuple  # of (ConvLayer, ConvLayer) pairs
    tail: ConvLayer

    def __post_init__(self):
        if (self.scale_x, self.scale_y) not in SCALE_MODES:
            raise ValueError(f"scale mode {self.scale_x}x{self.scale_y} not in {{1x1, 2x1, 2x2, 4x4}}")
        c = self.head.out_channels
        if self.head.in_channels != 3 or self.tail.out_channels != 3:
            raise ValueError("head must map 3 -> C and tail C -> 3 channels")
        if self.tail.in_channels != c:
            raise ValueError("tail input channels disagree with head output")
        for conv1, conv2 in self.blocks:
            if {conv1.in_channels, conv1.out_channels, conv2.in_channels, conv2.out_channels} != {c}:
                raise ValueError("residual block channel counts must all equal C")
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))

    @property
    def feature_channels(self) -> int:
        return self.head.out_channels

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def param_count(self) -> int:
        n = self.head.param_count + self.tail.param_count
        for conv1, conv2 in self.blocks:
            n += conv1.param_count + conv2.param_count
        return n

    def layers(self) -> list[ConvLayer]:
        out = [self.head]
        for conv1, conv2 in self.blocks:
            out += [conv1, conv2]
        out.append(self.tail)
        return out


def zero_model(scale_x: int, scale_y: int, channels: int = DEFAULT_CHANNELS,
               num_blocks: int = DEFAULT_BLOCKS) -> DrcasModel:
    """All-zero weights: forward pass degenerates to the bicubic baseline."""

    def zconv(cout, cin):
        return ConvLayer(np.zeros((cout, cin, 3, 3), np.float32), np.zeros(cout, np.float32))

    blocks = tuple((zconv(channels, channels), zconv(channels, channels)) for _ in range(num_blocks))
    return DrcasModel(scale_x, scale_y, zconv(channels, 3), blocks, zconv(3, channels))


def residual_forward(x: np.ndarray, model: DrcasModel) -> np.ndarray:
    """Network trunk only: tail(resblocks(head(x))) on a [0,1] float tensor."""
    t = conv2d(x, model.head)
    for conv1, conv2 in model.blocks:
        t = resblock_forward(t, conv1, conv2)
    return conv2d(t, model.tail)


def drcas_forward(lr: Image, model: DrcasModel) -> Image:
    """Restore a decoded, brightness-restored image: bicubic bypass + learned residual."""
    if lr.channels != 3:
        raise ValueError("drcas_forward expects a 3-channel image")
    base = bicubic_upscale(lr, model.scale_x, model.scale_y)
    x = base.planes.astype(np.float32) / 255.0
    r = residual_forward(x, model)
    out = round_half_away(255.0 * (x.astype(np.float64) + r.astype(np.float64)))
    return Image(np.clip(out, 0, 255).astype(np.uint8), 8)


# ---------------------------------------------------------------------------
# DRCS weight file format (little-endian)
# ---------------------------------------------------------------------------


class WeightFormatError(ValueError):
    pass


def save_weights(model: DrcasModel, path) -> None:
    """magic, version, scale, C, R header; then per-layer dims + weights + bias."""
    with open(path, "wb") as f:
        f.write(DRCS_MAGIC)
        f.write(struct.pack("<5I", DRCS_VERSION, model.scale_x, model.scale_y,
                            model.feature_channels, model.num_blocks))
        for layer in model.layers():
            out_c, in_c, kh, kw = layer.weights.shape
            f.write(struct.pack("<4I", out_c, in_c, kh, kw))
            f.write(layer.weights.astype("<f4").tobytes())
            f.write(layer.bias.astype("<f4").tobytes())


def load_weights(path) -> DrcasModel:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != DRCS_MAGIC:
        raise WeightFormatError(f"bad magic {data[:4]!r}, expected {DRCS_MAGIC!r}")
    if len(data) < 24:
        raise WeightFormatError("file too short for DRCS header")
    version, sx, sy, channels, num_blocks = struct.unpack_from("<5I", data, 4)
    if version != DRCS_VERSION:
        raise WeightFormatError(f"unsupported DRCS version {version}")
    pos = 24

    expected_dims = [(channels, 3)]
    for _ in range(num_blocks):
        expected_dims += [(channels, channels), (channels, channels)]
    expected_dims.append((3, channels))

    layers = []
    for want_out, want_in in expected_dims:
        if pos + 16 > len(data):
            raise WeightFormatError("file truncated in layer header")
        out_c, in_c, kh, kw = struct.unpack_from("<4I", data, pos)
        pos += 16
        if (out_c, in_c) != (want_out, want_in):
            raise WeightFormatError(
                f"layer declares {out_c}x{in_c} channels, topology expects {want_out}x{want_in}")
        n_w = out_c * in_c * kh * kw
        n_bytes = 4 * (n_w + out_c)
        if pos + n_bytes > len(data):
            raise WeightFormatError("layer payload shorter than declared dimensions")
        weights = np.frombuffer(data, dtype="<f4", count=n_w, offset=pos).reshape(out_c, in_c, kh, kw)
        pos += 4 * n_w
        bias = np.frombuffer(data, dtype="<f4", count=out_c, offset=pos)
        pos += 4 * out_c
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise WeightFormatError("non-finite weight in layer payload")
        layers.append(ConvLayer(weights.copy(), bias.copy()))
    if pos != len(data):
        raise WeightFormatError(f"{len(data) - pos} trailing bytes after last layer")

    head = layers[0]
    tail = layers[-1]
    blocks = tuple((layers[1 + 2 * i], layers[2 + 2 * i]) for i in range(num_blocks))
    try:
        return DrcasModel(sx, sy, head, blocks, tail)
    except ValueError as e:
        raise WeightFormatError(str(e)) from e

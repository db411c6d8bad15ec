"""Planar 8-bit image container, lossless I/O (PNG/PPM/PGM), PSNR, patch sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PEAK = 255.0  # 8-bit peak signal level used by psnr()


@dataclass(frozen=True)
class Image:
    """Integer raster stored as per-channel planes, shape (channels, height, width).

    `planes` is uint8 row-major; `bit_depth` says how many of the 8 storage bits
    are meaningful (every sample must be < 2**bit_depth). Instances are immutable:
    the backing array is marked read-only on construction.
    """

    planes: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        arr = np.ascontiguousarray(self.planes, dtype=np.uint8)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        if arr.ndim != 3:
            raise ValueError(f"planes must be (channels, height, width), got shape {arr.shape}")
        c, h, w = arr.shape
        if c not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ValueError("width and height must be >= 1")
        if not 1 <= self.bit_depth <= 8:
            raise ValueError(f"bit_depth must be in [1,8], got {self.bit_depth}")
        if self.bit_depth < 8 and arr.max(initial=0) >= (1 << self.bit_depth):
            raise ValueError(f"sample exceeds 2^{self.bit_depth}-1")
        arr.setflags(write=False)
        object.__setattr__(self, "planes", arr)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """Flat per-channel planar view, row-major within each plane."""
        return self.planes.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return (
            self.bit_depth == other.bit_depth
            and self.planes.shape == other.planes.shape
            and bool(np.array_equal(self.planes, other.planes))
        )


@dataclass(frozen=True)
class PatchSpec:
    """Square patch sampling request: patch edge length, how many, RNG seed."""

    size: int
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("patch size must be >= 1")
        if self.count < 1:
            raise ValueError("patch count must be >= 1")


def center_crop_to_multiple(img: Image, mult_x: int, mult_y: int) -> Image:
    """Center-crop to the largest size divisible by (mult_x, mult_y).

    Left/top offsets use floor((extra)/2). Binning callers use this so block
    edges never see padding.
    """
    if mult_x < 1 or mult_y < 1:
        raise ValueError("crop multiples must be >= 1")
    new_w = (img.width // mult_x) * mult_x
    new_h = (img.height // mult_y) * mult_y
    if new_w == 0 or new_h == 0:
        raise ValueError(f"image {img.width}x{img.height} smaller than {mult_x}x{mult_y} block")
    if new_w == img.width and new_h == img.height:
        return img
    x0 = (img.width - new_w) // 2
    y0 = (img.height - new_h) // 2
    return Image(img.planes[:, y0 : y0 + new_h, x0 : x0 + new_w], img.bit_depth)


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB, MSE pooled over all channels and pixels.

    Both images must be 8-bit with identical shape. Returns +inf for identical
    images.
    """
    if a.planes.shape != b.planes.shape:
        raise ValueError(f"dimension mismatch: {a.planes.shape} vs {b.planes.shape}")
    if a.bit_depth != 8 or b.bit_depth != 8:
        raise ValueError("psnr is defined for 8-bit images")
    diff = a.planes.astype(np.float64) - b.planes.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def sample_patches(img: Image, spec: PatchSpec, align: tuple[int, int] = (1, 1)) -> list[tuple[int, int]]:
    """Draw `spec.count` top-left (x, y) patch coordinates, all fully inside `img`.

    Deterministic for a fixed seed; coordinates are multiples of `align`
    (pass the binning factor to keep patches on bin boundaries).
    """
    ax, ay = align
    if ax < 1 or ay < 1:
        raise ValueError("alignment must be >= 1")
    if spec.size > img.width or spec.size > img.height:
        raise ValueError(f"patch size {spec.size} exceeds image {img.width}x{img.height}")
    nx = (img.width - spec.size) // ax + 1
    ny = (img.height - spec.size) // ay + 1
    rng = np.random.default_rng(spec.seed)
    xs = rng.integers(0, nx, size=spec.count) * ax
    ys = rng.integers(0, ny, size=spec.count) * ay
    return [(int(x), int(y)) for x, y in zip(xs, ys)]


# ---------------------------------------------------------------------------
# File I/O. PNG goes through Pillow; PPM (P6) / PGM (P5) are parsed here so the
# failure modes of the wire format stay explicit.
# ---------------------------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def load_image(path) -> Image:
    """Load an 8-bit PNG, binary PPM (P6) or binary PGM (P5) file."""
    path = Path(path)
    with open(path, "rb") as f:
        head = f.read(8)
    if head.startswith(_PNG_MAGIC):
        return _load_png(path)
    if head.startswith(b"P6") or head.startswith(b"P5"):
        return _load_pnm(path)
    raise ValueError(f"unsupported format: {path} is not PNG, PPM (P6) or PGM (P5)")


def save_image(img: Image, path) -> None:
    """Write `img` losslessly; format chosen by extension (.png/.ppm/.pgm).

    Single-channel images written as .ppm are replicated to three identical
    channels. Three-channel images cannot be written as .pgm.
    """
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".png":
        _save_png(img, path)
    elif ext == ".ppm":
        planes = img.planes
        if img.channels == 1:
            planes = np.repeat(planes, 3, axis=0)
        _save_pnm(planes, path, b"P6")
    elif ext == ".pgm":
        if img.channels == 3:
            raise ValueError("cannot save 3-channel image as PGM; use .ppm or .png")
        _save_pnm(img.planes, path, b"P5")
    else:
        raise ValueError(f"unsupported extension {ext!r}; use .png, .ppm or .pgm")


def _load_png(path: Path) -> Image:
    from PIL import Image as pil

    with pil.open(path) as im:
        if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise ValueError(f"{path}: bit depth > 8 is not supported")
        if im.mode in ("P", "1"):
            im = im.convert("RGB")
        if im.mode not in ("L", "RGB"):
            raise ValueError(f"{path}: unsupported PNG mode {im.mode!r}")
        arr = np.asarray(im, dtype=np.uint8)
    if arr.ndim == 2:
        planes = arr[np.newaxis, :, :]
    else:
        planes = np.transpose(arr, (2, 0, 1))
    return Image(planes, 8)


def _save_png(img: Image, path: Path) -> None:
    from PIL import Image as pil

    if img.channels == 1:
        im = pil.fromarray(img.planes[0], mode="L")
    else:
        im = pil.fromarray(np.transpose(img.planes, (1, 2, 0)), mode="RGB")
    im.save(path, format="PNG")


def _read_pnm_token(f) -> bytes:
    """Next whitespace-delimited token, skipping '#' comment lines."""
    tok = b""
    while True:
        ch = f.read(1)
        if ch == b"":
            raise ValueError("unexpected end of file in PNM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = f.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def _load_pnm(path: Path) -> Image:
    with open(path, "rb") as f:
        magic = f.read(2)
        channels = {b"P6": 3, b"P5": 1}.get(magic)
        if channels is None:
            raise ValueError(f"unsupported format: bad PNM magic {magic!r}")
        try:
            width = int(_read_pnm_token(f))
            height = int(_read_pnm_token(f))
            maxval = int(_read_pnm_token(f))
        except ValueError as e:
            if "end of file" in str(e):
                raise
            raise ValueError(f"{path}: malformed PNM header") from e
        if width < 1 or height < 1:
            raise ValueError(f"{path}: bad PNM dimensions {width}x{height}")
        if maxval > 255:
            raise ValueError(f"{path}: bit depth > 8 is not supported (maxval {maxval})")
        if maxval < 1:
            raise ValueError(f"{path}: bad PNM maxval {maxval}")
        n = width * height * channels
        payload = f.read(n)
        if len(payload) != n:
            raise ValueError(f"{path}: unexpected end of file in PNM payload")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return Image(np.transpose(arr, (2, 0, 1)), 8)


def _save_pnm(planes: np.ndarray, path: Path, magic: bytes) -> None:
    c, h, w = planes.shape
    header = magic + b"\n%d %d\n255\n" % (w, h)
    interleaved = np.transpose(planes, (1, 2, 0))
    with open(path, "wb") as f:
        f.write(header)
        f.write(interleaved.tobytes())

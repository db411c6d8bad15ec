"""Subprocess wrappers around the primary `compacq` CLI.

The trainer never computes binning, truncation or JPEG itself: every degraded
pixel comes out of these calls. The contract consumed here is the CLI's flag
surface, exit codes (0 ok / 1 runtime / 2 usage), the `.meta` sidecar, and the
images it reads/writes.
"""

from __future__ import annotations

import shutil
import subprocess
from pathlib import Path

import numpy as np
from PIL import Image


class PrimaryCliError(RuntimeError):
    pass


def find_cli() -> str:
    exe = shutil.which("compacq")
    if exe is None:
        raise PrimaryCliError("primary CLI 'compacq' not found on PATH; install the primary package")
    return exe


def _run(args: list) -> None:
    proc = subprocess.run([find_cli()] + [str(a) for a in args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise PrimaryCliError(
            f"compacq {' '.join(str(a) for a in args[:1])} exited {proc.returncode}: "
            f"{proc.stderr.strip()}")


def acquire(src_png, dst_jpg, bin_mode: str, truncate: int, quality: int) -> None:
    _run(["acquire", src_png, dst_jpg,
          "--bin", bin_mode, "--truncate", truncate, "--quality", quality])


def restore_bicubic(src_jpg, dst_png) -> None:
    _run(["restore", src_jpg, dst_png, "--method", "bicubic"])


def restore_decoded(src_jpg, dst_png) -> None:
    """Decode + brightness restore without upscaling (bin override to 1x1)."""
    _run(["restore", src_jpg, dst_png, "--method", "bicubic", "--bin", "1x1"])


def restore_drcas(src_jpg, dst_png, weights) -> None:
    _run(["restore", src_jpg, dst_png, "--method", "drcas", "--weights", weights])


def eval_psnr(ref_png, test_png) -> float:
    proc = subprocess.run([find_cli(), "eval", "--ref", str(ref_png), "--test", str(test_png)],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise PrimaryCliError(f"compacq eval failed: {proc.stderr.strip()}")
    return float(proc.stdout.strip())


def read_png(path) -> np.ndarray:
    """(H, W, 3) uint8; grayscale replicated so every image is RGB."""
    with Image.open(path) as im:
        if im.mode != "RGB":
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.uint8)


def write_png(path, array: np.ndarray) -> None:
    Image.fromarray(array, mode="RGB").save(path, format="PNG")

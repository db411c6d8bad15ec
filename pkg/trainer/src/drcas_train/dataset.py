"""Patch-pair generation through the primary CLI.

Whole images are degraded by `compacq acquire`/`restore` once each, then
aligned patches are cropped from the results. Alignment keeps every patch on
the binned JPEG block grid and away from partial edge blocks, so each LR patch
is bit-identical to running the CLI on the matching HR crop alone (JPEG blocks
are spatially independent); build_pairs spot-checks that equivalence by
actually re-running the CLI on sampled crops.
"""

from __future__ import annotations

import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import primary_cli as cli
from .config import TrainConfig


@dataclass(frozen=True)
class PairRecord:
    """One training pair; coordinates are HR pixels inside the center-cropped region."""

    source: str
    x: int
    y: int
    hr: np.ndarray        # (patch, patch, 3) uint8
    lr: np.ndarray        # (patch/bin_h, patch/bin_w, 3) uint8, decoded + 2^N restored
    bicubic: np.ndarray   # (patch, patch, 3) uint8, the primary's bicubic restoration


@dataclass(frozen=True)
class DegradedImage:
    source: str
    offset_x: int         # center-crop offset inside the original image
    offset_y: int
    hr_cropped: np.ndarray
    lr: np.ndarray
    bicubic: np.ndarray

    @property
    def max_start(self) -> tuple[int, int]:
        """Largest aligned (x, y) so a patch stays inside full JPEG blocks."""
        lr_h, lr_w = self.lr.shape[:2]
        bin_w = self.hr_cropped.shape[1] // lr_w
        bin_h = self.hr_cropped.shape[0] // lr_h
        return (lr_w // 8) * 8 * bin_w, (lr_h // 8) * 8 * bin_h


def degrade_image(path, cfg: TrainConfig, workdir) -> DegradedImage:
    """One acquire + two restores through the primary CLI."""
    workdir = Path(workdir)
    stream = workdir / (Path(path).stem + ".jpg")
    lr_png = workdir / (Path(path).stem + ".lr.png")
    bi_png = workdir / (Path(path).stem + ".bicubic.png")
    cli.acquire(path, stream, cfg.bin_mode, cfg.truncate_bits, cfg.quality)
    cli.restore_decoded(stream, lr_png)
    cli.restore_bicubic(stream, bi_png)

    full = cli.read_png(path)
    lr = cli.read_png(lr_png)
    bicubic = cli.read_png(bi_png)
    crop_h, crop_w = bicubic.shape[:2]
    oy = (full.shape[0] - crop_h) // 2
    ox = (full.shape[1] - crop_w) // 2
    return DegradedImage(
        source=Path(path).name,
        offset_x=ox,
        offset_y=oy,
        hr_cropped=full[oy : oy + crop_h, ox : ox + crop_w],
        lr=lr,
        bicubic=bicubic,
    )


def crop_pair(deg: DegradedImage, cfg: TrainConfig, x: int, y: int) -> PairRecord:
    p = cfg.patch_size
    return PairRecord(
        source=deg.source,
        x=x,
        y=y,
        hr=deg.hr_cropped[y : y + p, x : x + p].copy(),
        lr=deg.lr[y // cfg.bin_h : (y + p) // cfg.bin_h,
                  x // cfg.bin_w : (x + p) // cfg.bin_w].copy(),
        bicubic=deg.bicubic[y : y + p, x : x + p].copy(),
    )


def build_pairs(hr_paths, cfg: TrainConfig, count: int,
                workdir=None, workers: int = 2, audit: int = 3) -> list[PairRecord]:
    """Degrade `hr_paths` and sample `count` aligned patch pairs.

    Deterministic for a fixed cfg.seed and path order. `audit` randomly chosen
    pairs are re-generated by running the CLI on the bare HR crop and must
    match bit-exactly, failing loudly on any coordinate bookkeeping bug.
    """
    hr_paths = [Path(p) for p in hr_paths]
    if not hr_paths:
        raise ValueError("no HR images given")
    own_tmp = None
    if workdir is None:
        own_tmp = tempfile.TemporaryDirectory(prefix="drcas_pairs_")
        workdir = own_tmp.name
    Path(workdir).mkdir(parents=True, exist_ok=True)
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            degraded = list(pool.map(lambda p: degrade_image(p, cfg, workdir), hr_paths))

        step_x, step_y = 8 * cfg.bin_w, 8 * cfg.bin_h
        rng = np.random.default_rng(cfg.seed)
        usable = []
        for deg in degraded:
            max_x, max_y = deg.max_start
            if max_x >= cfg.patch_size and max_y >= cfg.patch_size:
                usable.append(deg)
        if not usable:
            raise ValueError(f"no image large enough for {cfg.patch_size}px patches")

        records = []
        for i in range(count):
            deg = usable[i % len(usable)]
            max_x, max_y = deg.max_start
            x = int(rng.integers(0, (max_x - cfg.patch_size) // step_x + 1)) * step_x
            y = int(rng.integers(0, (max_y - cfg.patch_size) // step_y + 1)) * step_y
            records.append(crop_pair(deg, cfg, x, y))

        for idx in rng.choice(len(records), size=min(audit, len(records)), replace=False):
            if not audit_pair(records[int(idx)], cfg, workdir):
                raise RuntimeError(
                    f"misaligned crop: patch at ({records[int(idx)].x},{records[int(idx)].y}) "
                    f"of {records[int(idx)].source} does not reproduce through the CLI")
        return records
    finally:
        if own_tmp is not None:
            own_tmp.cleanup()


def audit_pair(record: PairRecord, cfg: TrainConfig, workdir) -> bool:
    """Re-degrade the bare HR crop through the CLI; the LR patch must match bit-exactly."""
    workdir = Path(workdir)
    hr_png = workdir / "audit_hr.png"
    stream = workdir / "audit.jpg"
    lr_png = workdir / "audit_lr.png"
    cli.write_png(hr_png, record.hr)
    cli.acquire(hr_png, stream, cfg.bin_mode, cfg.truncate_bits, cfg.quality)
    cli.restore_decoded(stream, lr_png)
    return np.array_equal(cli.read_png(lr_png), record.lr)


def save_pairs(records, path) -> None:
    """Cache a pair list as one compressed npz."""
    arrays = {}
    meta = []
    for i, r in enumerate(records):
        arrays[f"hr{i}"] = r.hr
        arrays[f"lr{i}"] = r.lr
        arrays[f"bi{i}"] = r.bicubic
        meta.append((r.source, r.x, r.y))
    arrays["meta"] = np.array(meta, dtype=object)
    np.savez_compressed(path, **arrays)


def load_pairs(path) -> list[PairRecord]:
    with np.load(path, allow_pickle=True) as data:
        meta = data["meta"]
        return [
            PairRecord(source=str(m[0]), x=int(m[1]), y=int(m[2]),
                       hr=data[f"hr{i}"], lr=data[f"lr{i}"], bicubic=data[f"bi{i}"])
            for i, m in enumerate(meta)
        ]

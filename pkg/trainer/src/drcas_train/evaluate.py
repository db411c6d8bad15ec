"""Evaluation of exported models strictly through the primary engine:
degrade with the CLI, restore with the CLI (bicubic and DRCAS), score with the
CLI's PSNR command against the center-cropped originals.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from . import primary_cli as cli
from .config import TrainConfig


def evaluate_through_primary(weights, hr_paths, cfg: TrainConfig,
                             workdir=None) -> dict:
    """Mean bicubic and DRCAS PSNR over `hr_paths`, all through the CLI."""
    own_tmp = None
    if workdir is None:
        own_tmp = tempfile.TemporaryDirectory(prefix="drcas_eval_")
        workdir = own_tmp.name
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    bicubic_scores = []
    drcas_scores = []
    try:
        for path in hr_paths:
            stem = Path(path).stem
            stream = workdir / f"{stem}.jpg"
            bicubic_png = workdir / f"{stem}.bicubic.png"
            drcas_png = workdir / f"{stem}.drcas.png"
            ref_png = workdir / f"{stem}.ref.png"

            cli.acquire(path, stream, cfg.bin_mode, cfg.truncate_bits, cfg.quality)
            cli.restore_bicubic(stream, bicubic_png)
            cli.restore_drcas(stream, drcas_png, weights)

            full = cli.read_png(path)
            restored = cli.read_png(bicubic_png)
            oy = (full.shape[0] - restored.shape[0]) // 2
            ox = (full.shape[1] - restored.shape[1]) // 2
            cli.write_png(ref_png, full[oy : oy + restored.shape[0],
                                        ox : ox + restored.shape[1]])

            bicubic_scores.append(cli.eval_psnr(ref_png, bicubic_png))
            drcas_scores.append(cli.eval_psnr(ref_png, drcas_png))
    finally:
        if own_tmp is not None:
            own_tmp.cleanup()
    return {
        "bicubic": float(np.mean(bicubic_scores)),
        "drcas": float(np.mean(drcas_scores)),
        "per_image_bicubic": bicubic_scores,
        "per_image_drcas": drcas_scores,
    }

"""Training loop: mean-absolute-error on residuals, Adam, halving schedule.

The network input is the primary's bicubic restoration scaled to [0,1]; the
target is the residual between the clean patch and that input, so the
zero-initialized tail starts training exactly at the bicubic baseline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .config import TrainConfig
from .dataset import PairRecord
from .exporter import export_weights
from .model import DrcasNet


def _to_tensors(records: list[PairRecord]) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack uint8 patches; scaled to [0,1] floats per batch to bound memory."""
    bicubic = torch.from_numpy(np.stack([r.bicubic for r in records]).transpose(0, 3, 1, 2))
    hr = torch.from_numpy(np.stack([r.hr for r in records]).transpose(0, 3, 1, 2))
    return bicubic, hr


def train(records: list[PairRecord], cfg: TrainConfig, out_dir,
          log=print) -> tuple[Path, list[float]]:
    """Train on the given pairs; checkpoint each epoch; export the final DRCS.

    Returns (final weights path, per-epoch mean losses). Aborts with the
    offending step if the loss goes non-finite.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(cfg.seed)

    net = DrcasNet(cfg.channels, cfg.blocks, scale=(cfg.bin_w, cfg.bin_h))
    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)
    bicubic_u8, hr_u8 = _to_tensors(records)
    n = bicubic_u8.shape[0]
    sampler = np.random.default_rng(cfg.seed + 1)

    losses = []
    step = 0
    for epoch in range(cfg.epochs):
        lr_now = cfg.learning_rate * (0.5 ** (epoch // cfg.lr_halve_every))
        for group in optimizer.param_groups:
            group["lr"] = lr_now
        order = sampler.permutation(n)
        epoch_loss = 0.0
        batches = 0
        net.train()
        for start in range(0, n, cfg.batch_size):
            idx = torch.from_numpy(order[start : start + cfg.batch_size].copy())
            x = bicubic_u8[idx].float() / 255.0
            target = hr_u8[idx].float() / 255.0 - x
            optimizer.zero_grad()
            loss = torch.mean(torch.abs(net(x) - target))
            if not torch.isfinite(loss):
                raise RuntimeError(f"training diverged: non-finite loss at step {step}")
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            batches += 1
            step += 1
        losses.append(epoch_loss / max(batches, 1))
        export_weights(net, out_dir / f"checkpoint_epoch{epoch + 1}.drcs")
        log(f"epoch {epoch + 1}/{cfg.epochs}: L1 {losses[-1]:.5f} (lr {lr_now:.2e}, "
            f"{batches} steps)")

    final = out_dir / f"drcas_{cfg.tag()}.drcs"
    export_weights(net, final)
    return final, losses

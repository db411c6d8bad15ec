"""Config-file driven training entry point.

    python -m drcas_train --config train.cfg --hr-dir photos/ --out-dir runs/

The config file is INI-style, one section per training task (same section
shape as the primary's pipeline runner), e.g.:

    [2x2-n1-q90]
    bin = 2x2
    truncate = 1
    quality = 90
    patch_size = 128
    samples_per_epoch = 2000
    batch_size = 64
    epochs = 2
"""

import argparse
import sys
from pathlib import Path

from .config import load_config
from .dataset import build_pairs
from .train import train


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="drcas_train")
    ap.add_argument("--config", required=True, help="key=value training config file")
    ap.add_argument("--section", help="config section to train (default: first)")
    ap.add_argument("--hr-dir", required=True, help="directory of clean HR images")
    ap.add_argument("--out-dir", required=True, help="checkpoints and final weights")
    ap.add_argument("--workers", type=int, default=2, help="parallel degradation workers")
    args = ap.parse_args(argv)

    cfg = load_config(args.config, args.section)
    hr_paths = sorted(Path(args.hr_dir).glob("*.png"))
    if not hr_paths:
        print(f"error: no .png images in {args.hr_dir}", file=sys.stderr)
        return 1

    print(f"config {cfg.tag()}: {cfg.samples_per_epoch} samples/epoch, "
          f"{cfg.epochs} epochs, batch {cfg.batch_size}")
    records = build_pairs(hr_paths, cfg, cfg.samples_per_epoch, workers=args.workers)
    print(f"built {len(records)} pairs from {len(hr_paths)} images")
    final, losses = train(records, cfg, args.out_dir)
    print(f"final weights: {final}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

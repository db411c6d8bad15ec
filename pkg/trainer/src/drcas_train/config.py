"""Training configuration: one acquisition setting plus optimizer/budget knobs.

Configs load from INI-style key=value files, the same shape the primary's
pipeline runner uses, so a training grid and an evaluation grid can share
section layout.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

BIN_MODES = ((1, 1), (2, 1), (2, 2), (4, 4))


@dataclass(frozen=True)
class TrainConfig:
    bin_w: int = 2
    bin_h: int = 2
    truncate_bits: int = 0
    quality: int = 100
    patch_size: int = 128          # HR pixels
    samples_per_epoch: int = 70_000
    batch_size: int = 64
    epochs: int = 24
    learning_rate: float = 1e-4    # halved every lr_halve_every epochs
    lr_halve_every: int = 10
    channels: int = 64
    blocks: int = 6
    seed: int = 0

    def __post_init__(self):
        if (self.bin_w, self.bin_h) not in BIN_MODES:
            raise ValueError(f"bin mode {self.bin_w}x{self.bin_h} unsupported")
        if not 0 <= self.truncate_bits <= 3:
            raise ValueError("truncate_bits must be in [0,3]")
        if not 70 <= self.quality <= 100:
            raise ValueError("quality must be in [70,100]")
        if self.patch_size % (8 * self.bin_w) or self.patch_size % (8 * self.bin_h):
            # patches must land on the binned JPEG block grid
            raise ValueError(
                f"patch_size {self.patch_size} must be divisible by "
                f"{8 * self.bin_w} and {8 * self.bin_h}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.samples_per_epoch < 1 or self.epochs < 1:
            raise ValueError("sample and epoch budgets must be >= 1")

    @property
    def bin_mode(self) -> str:
        return f"{self.bin_w}x{self.bin_h}"

    @property
    def lr_patch(self) -> tuple[int, int]:
        return self.patch_size // self.bin_w, self.patch_size // self.bin_h

    def tag(self) -> str:
        return f"{self.bin_mode}_n{self.truncate_bits}_q{self.quality}"


def load_config(path, section: str | None = None) -> TrainConfig:
    """Read one section of a key=value config file into a TrainConfig."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"cannot read config file {path}")
    sections = parser.sections()
    if not sections:
        raise ValueError(f"config file {path} defines no sections")
    name = section or sections[0]
    if name not in parser:
        raise ValueError(f"no section [{name}] in {path}")
    sec = parser[name]
    bin_mode = sec.get("bin", "2x2").lower().split("x")
    return TrainConfig(
        bin_w=int(bin_mode[0]),
        bin_h=int(bin_mode[1]),
        truncate_bits=sec.getint("truncate", 0),
        quality=sec.getint("quality", 100),
        patch_size=sec.getint("patch_size", 128),
        samples_per_epoch=sec.getint("samples_per_epoch", 70_000),
        batch_size=sec.getint("batch_size", 64),
        epochs=sec.getint("epochs", 24),
        learning_rate=sec.getfloat("learning_rate", 1e-4),
        lr_halve_every=sec.getint("lr_halve_every", 10),
        channels=sec.getint("channels", 64),
        blocks=sec.getint("blocks", 6),
        seed=sec.getint("seed", 0),
    )

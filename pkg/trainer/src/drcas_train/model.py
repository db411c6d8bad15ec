"""DRCAS network in torch: head conv, R residual blocks (conv-relu-conv + skip,
relu after the add, no batch norm), tail conv. The tail starts at zero so an
untrained model reproduces the bicubic baseline exactly.
"""

from __future__ import annotations

import torch
from torch import nn


class ResidualBlock(nn.Module):
    def __init__(self, channels: int, detach_skip: bool = False):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.detach_skip = detach_skip  # fault injection for the gradient check

    def forward(self, x):
        skip = x.detach() if self.detach_skip else x
        return torch.relu(self.conv2(torch.relu(self.conv1(x))) + skip)


class DrcasNet(nn.Module):
    """Predicts the residual over the bicubic-upsampled input, in [0,1] space."""

    def __init__(self, channels: int = 64, blocks: int = 6,
                 scale: tuple = (2, 2), detach_skip: bool = False):
        super().__init__()
        self.scale = tuple(scale)
        self.head = nn.Conv2d(3, channels, 3, padding=1)
        self.blocks = nn.ModuleList(
            ResidualBlock(channels, detach_skip) for _ in range(blocks))
        self.tail = nn.Conv2d(channels, 3, 3, padding=1)
        nn.init.zeros_(self.tail.weight)
        nn.init.zeros_(self.tail.bias)

    def forward(self, x):
        t = self.head(x)
        for block in self.blocks:
            t = block(t)
        return self.tail(t)

    def restore(self, bicubic01: torch.Tensor) -> torch.Tensor:
        """Full restoration in [0,1]: bypass plus residual (not yet quantized)."""
        return bicubic01 + self.forward(bicubic01)

    @property
    def param_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

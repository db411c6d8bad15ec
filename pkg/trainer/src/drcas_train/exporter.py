"""DRCS weight-file writer/reader and the trainer-vs-primary cross check.

Little-endian: magic "DRCS", u32 version=1, u32 scale_x, u32 scale_y, u32 C,
u32 R; then layers head, block1.conv1, block1.conv2, ..., blockR.conv2, tail;
each layer u32 out/in/kh/kw, float32 weights (out, in, kh, kw), float32 biases.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import torch

from .model import DrcasNet

MAGIC = b"DRCS"
VERSION = 1


def _layer_order(net: DrcasNet):
    yield net.head
    for block in net.blocks:
        yield block.conv1
        yield block.conv2
    yield net.tail


def export_weights(net: DrcasNet, path) -> None:
    channels = net.head.out_channels
    blocks = len(net.blocks)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<5I", VERSION, net.scale[0], net.scale[1], channels, blocks))
        for conv in _layer_order(net):
            w = conv.weight.detach().cpu().numpy().astype("<f4")
            b = conv.bias.detach().cpu().numpy().astype("<f4")
            out_c, in_c, kh, kw = w.shape
            f.write(struct.pack("<4I", out_c, in_c, kh, kw))
            f.write(w.tobytes())
            f.write(b.tobytes())
    tmp.replace(path)


def import_weights(path) -> DrcasNet:
    """Read a DRCS file back into a torch net (round-trip and resume support)."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"bad magic {data[:4]!r}")
    version, sx, sy, channels, blocks = struct.unpack_from("<5I", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported DRCS version {version}")
    net = DrcasNet(channels=channels, blocks=blocks, scale=(sx, sy))
    pos = 24
    with torch.no_grad():
        for conv in _layer_order(net):
            out_c, in_c, kh, kw = struct.unpack_from("<4I", data, pos)
            pos += 16
            n = out_c * in_c * kh * kw
            w = np.frombuffer(data, dtype="<f4", count=n, offset=pos).reshape(out_c, in_c, kh, kw)
            pos += 4 * n
            b = np.frombuffer(data, dtype="<f4", count=out_c, offset=pos)
            pos += 4 * out_c
            conv.weight.copy_(torch.from_numpy(w.copy()))
            conv.bias.copy_(torch.from_numpy(b.copy()))
    if pos != len(data):
        raise ValueError("trailing bytes in DRCS file")
    return net


def forward_restore_u8(net: DrcasNet, bicubic_u8: np.ndarray) -> np.ndarray:
    """This component's full restoration of a (H, W, 3) bicubic base image,
    quantized exactly like the primary engine (round half away, clamp)."""
    x01 = bicubic_u8.astype(np.float32).transpose(2, 0, 1) / 255.0
    with torch.no_grad():
        residual = net(torch.from_numpy(x01)[None])[0].numpy()
    v = 255.0 * (x01.astype(np.float64) + residual.astype(np.float64))
    rounded = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8).transpose(1, 2, 0)


def cross_check(net: DrcasNet, hr_patch: np.ndarray, truncate: int, quality: int,
                workdir) -> int:
    """Degrade one HR patch through the primary CLI, restore it with the
    exported weights in the primary engine, and compare against this
    component's own forward pass. Returns the max per-sample deviation."""
    from . import primary_cli as cli

    workdir = Path(workdir)
    hr_png = workdir / "xcheck_hr.png"
    stream = workdir / "xcheck.jpg"
    base_png = workdir / "xcheck_base.png"
    primary_png = workdir / "xcheck_primary.png"
    weights = workdir / "xcheck.drcs"

    export_weights(net, weights)
    cli.write_png(hr_png, hr_patch)
    cli.acquire(hr_png, stream, f"{net.scale[0]}x{net.scale[1]}", truncate, quality)
    cli.restore_bicubic(stream, base_png)
    cli.restore_drcas(stream, primary_png, weights)

    ours = forward_restore_u8(net, cli.read_png(base_png))
    theirs = cli.read_png(primary_png)
    return int(np.abs(ours.astype(int) - theirs.astype(int)).max())

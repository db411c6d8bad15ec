"""The DRCAS restoration engine: bicubic bypass plus a learned residual.

Demonstrates the zero-model identity (an all-zero network IS the bicubic
baseline), the DRCS weight-file round trip, and a forward pass with random
weights on a degraded photo.

    python demos/restoration_engine.py
"""

import tempfile
from pathlib import Path

import numpy as np

from compacq import (
    AcquisitionConfig,
    Image,
    acquire,
    bicubic_upscale,
    center_crop_to_multiple,
    drcas_forward,
    jpeg_decode,
    load_image,
    load_weights,
    psnr,
    restore_brightness,
    save_weights,
    zero_model,
)
from compacq.restoration import ConvLayer, DrcasModel

PHOTOS = Path(__file__).parent.parent / "tests" / "data" / "photos"


def tiny_random_model(rng, sx, sy, channels=8, blocks=2):
    def conv(cout, cin, scale):
        return ConvLayer((rng.standard_normal((cout, cin, 3, 3)) * scale).astype(np.float32),
                         np.zeros(cout, np.float32))

    return DrcasModel(
        sx, sy,
        head=conv(channels, 3, 0.2),
        blocks=tuple((conv(channels, channels, 0.1), conv(channels, channels, 0.1))
                     for _ in range(blocks)),
        tail=conv(3, channels, 0.01),
    )


def main():
    img = load_image(PHOTOS / "chelsea.png")
    cfg = AcquisitionConfig(2, 2, 1, 90)
    cropped = center_crop_to_multiple(img, 2, 2)
    lr = restore_brightness(jpeg_decode(acquire(cropped, cfg)), 1)
    print(f"degraded {cropped.width}x{cropped.height} -> {lr.width}x{lr.height} "
          f"(bin 2x2, 1 bit truncated, Q=90)")

    model = zero_model(2, 2)
    print(f"default model: C={model.feature_channels}, R={model.num_blocks}, "
          f"{model.param_count} trainable weights")

    base = bicubic_upscale(lr, 2, 2)
    out = drcas_forward(lr, model)
    identical = np.array_equal(out.planes, base.planes)
    print(f"zero-model output == bicubic: {identical}")
    print(f"bicubic restoration: {psnr(cropped, base):.2f} dB")

    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "model.drcs"
        save_weights(model, path)
        back = load_weights(path)
        print(f"DRCS round trip: {path.stat().st_size} bytes, "
              f"{back.param_count} weights, scale {back.scale_x}x{back.scale_y}")

    rng = np.random.default_rng(0)
    random = tiny_random_model(rng, 2, 2)
    noisy = drcas_forward(lr, random)
    print(f"random tiny model (untrained): {psnr(cropped, noisy):.2f} dB "
          "(a residual net must be trained before it helps)")


if __name__ == "__main__":
    main()

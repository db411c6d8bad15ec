"""Walk one photograph through the full acquisition/restoration pipeline.

Stages: center-crop -> pixel binning -> bit truncation -> JPEG encode ->
(transmission) -> JPEG decode -> brightness restore -> bicubic upscale,
printing data sizes and fidelity at each configuration.

    python demos/pipeline_walkthrough.py [image.png]
"""

import sys
from pathlib import Path

from compacq import (
    AcquisitionConfig,
    acquire,
    bicubic_upscale,
    center_crop_to_multiple,
    jpeg_decode,
    load_image,
    psnr,
    restore_brightness,
)
from compacq.analysis import png_baseline_bytes, raw_compression

DEFAULT_IMAGE = Path(__file__).parent.parent / "tests" / "data" / "photos" / "coffee.png"


def main():
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_IMAGE
    img = load_image(path)
    print(f"{path.name}: {img.width}x{img.height}, {img.channels} channels")
    baseline = png_baseline_bytes(img)
    print(f"lossless PNG baseline: {baseline} bytes\n")

    print(f"{'config':>22} {'stream':>9} {'size%':>7} {'rawcomp':>8} {'psnr':>7}")
    for bin_w, bin_h in ((1, 1), (2, 1), (2, 2), (4, 4)):
        for n in (0, 2):
            for q in (70, 100):
                cfg = AcquisitionConfig(bin_w, bin_h, n, q)
                cropped = center_crop_to_multiple(img, bin_w, bin_h)
                stream = acquire(cropped, cfg)
                lr = restore_brightness(jpeg_decode(stream), n)
                restored = bicubic_upscale(lr, bin_w, bin_h)
                quality = psnr(cropped, restored)
                rc = float(raw_compression(cfg.binned_pixels, cfg.bitwidth))
                label = f"{cfg.bin_mode} n={n} q={q}"
                print(f"{label:>22} {len(stream):>9} {len(stream)/baseline:>7.2%} "
                      f"{rc:>8.2%} {quality:>6.2f}dB")


if __name__ == "__main__":
    main()

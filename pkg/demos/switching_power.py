"""Bus switching activity per bit lane, before and after truncation.

The dynamic-power argument for truncation: low bit lanes toggle almost every
other cycle on photographic data, high lanes rarely; dropping LSBs therefore
removes the busiest lines from the readout bus. Rising-edge rates feed the
P = alpha * C * V^2 * F model; toggle rates are also shown.

    python demos/switching_power.py
"""

from pathlib import Path

import numpy as np

from compacq import Image, bin_average, center_crop_to_multiple, load_image, truncate_bits
from compacq.analysis import switching_counts

PHOTOS = Path(__file__).parent.parent / "tests" / "data" / "photos"


def pooled(images, edges):
    counts = np.zeros(8, np.int64)
    transitions = 0
    for img in images:
        c, t = switching_counts(img, edges)
        counts += c
        transitions += t
    return counts / transitions


def bar(value, scale=60):
    return "#" * int(round(value * scale))


def main():
    images = [load_image(p) for p in sorted(PHOTOS.glob("*.png"))]
    rising = pooled(images, "rising")
    toggle = pooled(images, "toggle")

    print(f"original 8-bit readout over {len(images)} photos")
    print(f"{'bit':>4} {'rising':>8} {'toggle':>8}")
    for k in range(8):
        tag = "LSB" if k == 0 else ("MSB" if k == 7 else f"  {k}")
        print(f"{tag:>4} {rising[k]:>8.3f} {toggle[k]:>8.3f}  {bar(toggle[k])}")

    truncated = [
        Image(truncate_bits(bin_average(center_crop_to_multiple(img, 2, 2), 2, 2), 2).planes, 8)
        for img in images
    ]
    rising_t = pooled(truncated, "rising")
    print("\nafter 2x2 binning + 2-bit truncation (6-bit words on the bus)")
    for k in range(8):
        print(f"{k:>4} {rising_t[k]:>8.3f}  {bar(rising_t[k])}")
    print("\nbit lanes 6-7 are silent: truncated words never drive them")


if __name__ == "__main__":
    main()

"""Rate-distortion behaviour of the JPEG stage: sweep the quality factor and
plot stream size against decode fidelity for a few photographs.

    python demos/rate_distortion.py            # prints the table
    python demos/rate_distortion.py --plot rd.png
"""

import argparse
from pathlib import Path

import numpy as np

from compacq import Image, jpeg_decode, jpeg_encode, load_image, psnr

PHOTOS = Path(__file__).parent.parent / "tests" / "data" / "photos"
NAMES = ["astronaut", "coffee", "china"]
QUALITIES = list(range(70, 101, 5))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--plot", help="write a matplotlib figure to this path")
    args = ap.parse_args()

    curves = {}
    for name in NAMES:
        img = load_image(PHOTOS / f"{name}.png")
        img = Image(img.planes[:, :256, :256])
        sizes, fidelity = [], []
        for q in QUALITIES:
            stream = jpeg_encode(img, q)
            sizes.append(len(stream))
            fidelity.append(psnr(img, jpeg_decode(stream)))
        curves[name] = (sizes, fidelity)

    print(f"{'Q':>4}", *(f"{n:>20}" for n in NAMES))
    for i, q in enumerate(QUALITIES):
        cells = [f"{curves[n][0][i]:>8}B {curves[n][1][i]:>6.2f}dB" for n in NAMES]
        print(f"{q:>4}", *(f"{c:>20}" for c in cells))

    for name, (sizes, fidelity) in curves.items():
        assert sizes == sorted(sizes), "stream size must grow with quality"
        assert fidelity == sorted(fidelity), "psnr must grow with quality"

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for name, (sizes, fidelity) in curves.items():
            ax.plot(np.array(sizes) / 1024, fidelity, marker="o", label=name)
        ax.set_xlabel("stream size (KiB)")
        ax.set_ylabel("PSNR (dB)")
        ax.set_title("JPEG rate-distortion, Q in [70,100]")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
        print(f"wrote {args.plot}")


if __name__ == "__main__":
    main()

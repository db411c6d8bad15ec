"""Command-line driver for the acquisition/restoration pipeline.

Thin shell over the library: every subcommand's output is byte-identical to
calling the library directly. Exit codes are a stable contract: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

USAGE_ERROR = 2
RUNTIME_ERROR = 1

BIN_CHOICES = ("1x1", "2x1", "2x2", "4x4")


def _quality(text: str) -> int:
    try:
        q = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"quality must be an integer, got {text!r}")
    if not 70 <= q <= 100:
        raise argparse.ArgumentTypeError(f"quality must be in [70,100], got {q}")
    return q


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compacq",
        description="Compressed image acquisition (binning + bit truncation + JPEG) "
                    "with bicubic/DRCAS restoration and analysis tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("acquire", help="bin, truncate and JPEG-encode an image")
    p.add_argument("input", help="source image (.png/.ppm/.pgm)")
    p.add_argument("output", help="destination JPEG stream")
    p.add_argument("--bin", default="1x1", choices=BIN_CHOICES, help="binning mode")
    p.add_argument("--truncate", type=int, default=0, choices=(0, 1, 2, 3),
                   help="LSBs to truncate")
    p.add_argument("--quality", type=_quality, default=100, help="JPEG quality in [70,100]")

    p = sub.add_parser("restore", help="decode, restore brightness and upscale")
    p.add_argument("input", help="JPEG stream produced by acquire")
    p.add_argument("output", help="destination image (.png/.ppm/.pgm)")
    p.add_argument("--method", required=True, choices=("bicubic", "drcas"))
    p.add_argument("--weights", help="DRCS weights file (required for --method drcas)")
    p.add_argument("--bin", choices=BIN_CHOICES, help="override sidecar binning mode")
    p.add_argument("--truncate", type=int, choices=(0, 1, 2, 3),
                   help="override sidecar truncation bits")

    p = sub.add_parser("eval", help="print PSNR between two images")
    p.add_argument("--ref", required=True, help="reference image")
    p.add_argument("--test", required=True, help="image under test")

    p = sub.add_parser("analyze", help="dataset analysis reports")
    p.add_argument("--mode", required=True, choices=("switching", "rawcomp", "size", "table1"))
    p.add_argument("--dataset", help="directory of images (not needed for rawcomp)")
    p.add_argument("--out", required=True, help="CSV report path")
    p.add_argument("--workers", type=int, default=os.cpu_count(),
                   help="parallel per-image workers")
    p.add_argument("--limit", type=int, help="use only the first N dataset images")
    p.add_argument("--truncated", action="store_true",
                   help="measure switching activity on truncated streams instead of originals")
    p.add_argument("--bin", choices=BIN_CHOICES, default="1x1",
                   help="binning mode for --truncated switching analysis")
    p.add_argument("--truncate", type=int, default=0, choices=(0, 1, 2, 3),
                   help="truncation bits for --truncated switching analysis")
    p.add_argument("--weights-dir",
                   help="directory of drcas_BINxBIN_nN_qQ.drcs files for table1 mode")

    p = sub.add_parser("pipeline", help="batch-evaluate configs from a key=value file")
    p.add_argument("--config", required=True, help="INI-style config file, one section per run")
    p.add_argument("--out", required=True, help="CSV report path")
    p.add_argument("--dataset", help="default dataset directory for sections that omit one")
    p.add_argument("--workers", type=int, default=os.cpu_count())
    p.add_argument("--limit", type=int, help="use only the first N dataset images")

    return parser


def write_sidecar(stream_path: Path, bin_mode: str, truncate: int, quality: int) -> None:
    meta = stream_path.with_name(stream_path.name + ".meta")
    meta.write_text(f"bin={bin_mode}\ntruncate={truncate}\nquality={quality}\n")


def read_sidecar(stream_path: Path) -> dict:
    meta = stream_path.with_name(stream_path.name + ".meta")
    out = {}
    if meta.exists():
        for line in meta.read_text().splitlines():
            if "=" in line:
                key, _, value = line.partition("=")
                out[key.strip()] = value.strip()
    return out


def cmd_acquire(args) -> int:
    from .acquisition import AcquisitionConfig, acquire, parse_bin_mode
    from .image import load_image

    bin_w, bin_h = parse_bin_mode(args.bin)
    cfg = AcquisitionConfig(bin_w, bin_h, args.truncate, args.quality)
    stream = acquire(load_image(args.input), cfg)
    out = Path(args.output)
    out.write_bytes(stream)
    write_sidecar(out, args.bin, args.truncate, args.quality)
    return 0


def cmd_restore(args) -> int:
    from .acquisition import parse_bin_mode, restore_brightness
    from .image import save_image
    from .jpeg import jpeg_decode
    from .restoration import bicubic_upscale, drcas_forward, load_weights

    if args.method == "drcas" and not args.weights:
        print("error: --method drcas requires --weights", file=sys.stderr)
        return USAGE_ERROR

    sidecar = read_sidecar(Path(args.input))
    bin_mode = args.bin or sidecar.get("bin")
    truncate = args.truncate if args.truncate is not None else sidecar.get("truncate")
    if bin_mode is None or truncate is None:
        print("error: no sidecar metadata found; pass --bin and --truncate", file=sys.stderr)
        return USAGE_ERROR
    bin_w, bin_h = parse_bin_mode(bin_mode)
    n = int(truncate)
    if not 0 <= n <= 3:
        print(f"error: truncate={n} out of range [0,3]", file=sys.stderr)
        return USAGE_ERROR

    restored = restore_brightness(jpeg_decode(Path(args.input).read_bytes()), n)
    if args.method == "bicubic":
        out = bicubic_upscale(restored, bin_w, bin_h)
    else:
        model = load_weights(args.weights)
        if (model.scale_x, model.scale_y) != (bin_w, bin_h):
            print(
                f"error: model restores {model.scale_x}x{model.scale_y} "
                f"but stream was binned {bin_w}x{bin_h}",
                file=sys.stderr,
            )
            return USAGE_ERROR
        out = drcas_forward(restored, model)
    save_image(out, args.output)
    return 0


def cmd_eval(args) -> int:
    from .image import load_image, psnr

    value = psnr(load_image(args.ref), load_image(args.test))
    print(f"{value:.2f}")
    return 0


def cmd_analyze(args) -> int:
    from .acquisition import AcquisitionConfig, parse_bin_mode
    from .analysis import (
        eval_config,
        raw_compression,
        raw_compression_percent_text,
        write_convention_header,
        write_reports,
    )

    out = Path(args.out)

    if args.mode == "rawcomp":
        import csv as _csv

        with open(out, "w", newline="") as fh:
            write_convention_header(fh)
            writer = _csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin", "binned_pixels", "bitwidth", "fraction", "percent"])
            for mode, n in (("2x1", 2), ("2x2", 4), ("4x4", 16)):
                for bw in (8, 7, 6, 5):
                    frac = raw_compression(n, bw)
                    writer.writerow([mode, n, bw, f"{float(frac):.8f}",
                                     raw_compression_percent_text(frac)])
        return 0

    if not args.dataset:
        print("error: --dataset is required for this mode", file=sys.stderr)
        return USAGE_ERROR

    if args.mode == "switching":
        return _analyze_switching(args, out)

    # size/table1: sweep the full 48-config grid
    reports = []
    for mode in ("2x1", "2x2", "4x4"):
        bin_w, bin_h = parse_bin_mode(mode)
        for n in (0, 1, 2, 3):
            for q in (100, 90, 80, 70):
                cfg = AcquisitionConfig(bin_w, bin_h, n, q)
                restorer = "bicubic"
                if args.mode == "table1" and args.weights_dir:
                    candidate = Path(args.weights_dir) / f"drcas_{mode}_n{n}_q{q}.drcs"
                    if candidate.exists():
                        restorer = str(candidate)
                reports.append(
                    eval_config(args.dataset, cfg, restorer,
                                workers=args.workers, limit=args.limit)
                )
    with open(out, "w", newline="") as fh:
        write_reports(reports, fh)
    return 0


def _analyze_switching(args, out: Path) -> int:
    import csv as _csv

    from .acquisition import bin_average, parse_bin_mode, truncate_bits
    from .analysis import list_dataset, switching_counts, write_convention_header
    from .image import Image, center_crop_to_multiple, load_image

    bin_w, bin_h = parse_bin_mode(args.bin)
    total_rises = 0
    total_toggles = 0
    total_transitions = 0
    with open(out, "w", newline="") as fh:
        write_convention_header(fh, "truncated" if args.truncated else "original")
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["image"]
                        + [f"alpha{k}" for k in range(8)]
                        + [f"toggle{k}" for k in range(8)])
        paths = list_dataset(args.dataset)
        if args.limit:
            paths = paths[: args.limit]
        for path in paths:
            img = load_image(path)
            if args.truncated:
                img = center_crop_to_multiple(img, bin_w, bin_h)
                img = Image(truncate_bits(bin_average(img, bin_w, bin_h),
                                          args.truncate).planes, 8)
            rises, transitions = switching_counts(img, "rising")
            toggles, _ = switching_counts(img, "toggle")
            scale = 1.0 / transitions if transitions else 0.0
            writer.writerow([path.name]
                            + [f"{a * scale:.6f}" for a in rises]
                            + [f"{a * scale:.6f}" for a in toggles])
            total_rises = total_rises + rises
            total_toggles = total_toggles + toggles
            total_transitions += transitions
        scale = 1.0 / total_transitions if total_transitions else 0.0
        writer.writerow(["POOLED"]
                        + [f"{a * scale:.6f}" for a in total_rises]
                        + [f"{a * scale:.6f}" for a in total_toggles])
    return 0


def cmd_pipeline(args) -> int:
    import configparser

    from .acquisition import AcquisitionConfig, parse_bin_mode
    from .analysis import eval_config, write_reports

    parser = configparser.ConfigParser()
    read = parser.read(args.config)
    if not read:
        print(f"error: cannot read config file {args.config}", file=sys.stderr)
        return RUNTIME_ERROR
    if not parser.sections():
        print(f"error: config file {args.config} defines no runs", file=sys.stderr)
        return USAGE_ERROR

    reports = []
    for section in parser.sections():
        sec = parser[section]
        try:
            bin_w, bin_h = parse_bin_mode(sec.get("bin", "1x1"))
            cfg = AcquisitionConfig(bin_w, bin_h, sec.getint("truncate", 0),
                                    sec.getint("quality", 100))
        except ValueError as e:
            print(f"error: [{section}]: {e}", file=sys.stderr)
            return USAGE_ERROR
        dataset = sec.get("dataset", args.dataset)
        if not dataset:
            print(f"error: [{section}]: no dataset given (section key or --dataset)",
                  file=sys.stderr)
            return USAGE_ERROR
        restorer = sec.get("restorer", "bicubic")
        reports.append(eval_config(dataset, cfg, restorer,
                                   workers=args.workers, limit=args.limit))
    with open(args.out, "w", newline="") as fh:
        write_reports(reports, fh)
    return 0


_COMMANDS = {
    "acquire": cmd_acquire,
    "restore": cmd_restore,
    "eval": cmd_eval,
    "analyze": cmd_analyze,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return RUNTIME_ERROR
    except Exception as e:  # runtime failures exit 1 with the message on stderr
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())

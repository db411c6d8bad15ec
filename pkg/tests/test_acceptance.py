"""Acceptance suite: one test per release criterion, each printing a summary line.

DIV2K-pinned criteria run against $DIV2K_DIR (or tests/data/div2k/) holding
0701.png-0800.png and skip with instructions when the dataset is absent; where
a documented stand-in makes sense, the bundled photo corpus is used with its
own tolerance and is labeled as such in the output.

Run with `pytest tests/test_acceptance.py -v -s` to see all measurements.
"""

import math

import numpy as np
import pytest

from compacq import (
    AcquisitionConfig,
    Image,
    bicubic_upscale,
    center_crop_to_multiple,
    conv2d,
    drcas_forward,
    jpeg_decode,
    jpeg_encode,
    load_image,
    load_weights,
    psnr,
    restore_brightness,
    save_weights,
    truncate_bits,
    zero_model,
)
from compacq.analysis import (
    raw_compression,
    raw_compression_percent_text,
    switching_counts,
)
from compacq.jpeg import fdct8x8, idct8x8
from compacq.restoration import ConvLayer
from conftest import FIXTURES_DIR, corpus_paths, div2k_dir
import oracles

REFERENCE_ALPHA_PROFILE = [0.48, 0.46, 0.41, 0.33, 0.25, 0.17, 0.09, 0.04]  # LSB..MSB
REFERENCE_BICUBIC_PSNR = {(2, 2): 30.97, (2, 1): 33.19}  # Q=100, bitwidth 8

RAW_COMPRESSION_TABLE = {
    (2, 8): "50", (2, 7): "56.25", (2, 6): "62.5", (2, 5): "68.75",
    (4, 8): "75", (4, 7): "78.12", (4, 6): "81.25", (4, 5): "84.37",
    (16, 8): "93.75", (16, 7): "94.53", (16, 6): "95.31", (16, 5): "96.09",
}


def report(name: str, detail: str) -> None:
    print(f"[ACCEPTANCE] {name}: {detail}")


def test_raw_compression_table_exact():
    """All 12 raw-compression entries match the printed table, exact arithmetic."""
    for (n, b), expected in RAW_COMPRESSION_TABLE.items():
        got = raw_compression_percent_text(raw_compression(n, b))
        assert got == expected, f"({n},{b}): {got} != {expected}"
    report("raw-compression", "12/12 entries exact")


def _pooled_alpha(paths, edges):
    counts = np.zeros(8, np.int64)
    transitions = 0
    for p in paths:
        c, t = switching_counts(load_image(p), edges)
        counts += c
        transitions += t
    return counts / transitions


def test_switching_activity_profile():
    """Bit-lane activity profile matches the reference table.

    The reference numbers are toggle rates (a random LSB rises at most ~0.25
    per cycle, so 0.48 can only be a both-edges count); see decisions ledger.
    DIV2K: +-0.03 full set, +-0.05 on a 20-image subset. Without DIV2K the
    bundled 16-photo corpus stands in at the subset tolerance.
    """
    d = div2k_dir()
    if d is not None:
        paths = sorted(d.glob("*.png"))
        tolerance = 0.03 if len(paths) >= 100 else 0.05
        label = f"DIV2K ({len(paths)} images)"
        if len(paths) < 20:
            pytest.skip(f"{d} holds only {len(paths)} images; need >= 20")
    else:
        paths = corpus_paths()
        tolerance = 0.05
        label = f"bundled corpus stand-in ({len(paths)} photos)"
    alpha = _pooled_alpha(paths, "toggle")
    deltas = alpha - np.array(REFERENCE_ALPHA_PROFILE)
    report("alpha-profile", f"{label}: toggle alpha {np.round(alpha, 3).tolist()} "
                     f"max|delta| {np.abs(deltas).max():.3f} (tol {tolerance})")
    assert np.abs(deltas).max() <= tolerance
    assert all(alpha[k] >= alpha[k + 1] for k in range(7))


def _bicubic_column_psnr(paths, bin_w, bin_h):
    values = []
    for p in paths:
        img = load_image(p)
        cropped = center_crop_to_multiple(img, bin_w, bin_h)
        cfg = AcquisitionConfig(bin_w, bin_h, 0, 100)
        from compacq import acquire

        restored = restore_brightness(jpeg_decode(acquire(cropped, cfg)), 0)
        values.append(psnr(cropped, bicubic_upscale(restored, bin_w, bin_h)))
    return float(np.mean(values))


@pytest.mark.div2k
def test_bicubic_reference_psnr():
    """Mean bicubic-restoration PSNR at Q=100/bitwidth 8 matches the reference
    table: 30.97 dB (2x2) and 33.19 dB (2x1); +-0.7 dB full set, +-1.0 dB on a
    10-image subset. Content-dependent, so no non-DIV2K stand-in exists."""
    d = div2k_dir()
    if d is None:
        pytest.skip(
            "DIV2K dataset not present. Provide DIV2K 0701.png-0800.png in "
            "$DIV2K_DIR or tests/data/div2k/ to run the bicubic reference-PSNR criterion.")
    paths = sorted(d.glob("*.png"))
    full = len(paths) >= 100
    if not full:
        paths = paths[:10]
    tolerance = 0.7 if full else 1.0
    for (bw, bh), expected in REFERENCE_BICUBIC_PSNR.items():
        got = _bicubic_column_psnr(paths, bw, bh)
        report("bicubic-psnr", f"{bw}x{bh}: {got:.2f} dB vs {expected} (tol {tolerance}, "
                         f"{len(paths)} images)")
        assert abs(got - expected) <= tolerance


def test_codec_properties():
    """Size and PSNR monotone in Q on the corpus; constant block lossless at
    every Q; third-party fixtures decode within +-1 per sample."""
    paths = corpus_paths()
    qualities = (70, 80, 90, 100)
    sizes = {q: [] for q in qualities}
    fidelity = {q: [] for q in qualities}
    for p in paths:
        img = load_image(p)
        img = Image(img.planes[:, :256, :256])
        for q in qualities:
            stream = jpeg_encode(img, q)
            sizes[q].append(len(stream))
            fidelity[q].append(psnr(img, jpeg_decode(stream)))
    mean_sizes = [float(np.mean(sizes[q])) for q in qualities]
    mean_psnrs = [float(np.mean(fidelity[q])) for q in qualities]
    assert mean_sizes == sorted(mean_sizes), f"sizes not monotone: {mean_sizes}"
    assert mean_psnrs == sorted(mean_psnrs), f"psnr not monotone: {mean_psnrs}"

    constant = Image(np.full((1, 8, 8), 128, np.uint8))
    for q in range(70, 101):
        assert jpeg_decode(jpeg_encode(constant, q)) == constant

    worst = 0
    for name in ("gray_textured_q85", "rgb_tiles_444_q92", "rgb_ramp_420_q90"):
        data = (FIXTURES_DIR / f"{name}.jpg").read_bytes()
        ref = np.load(FIXTURES_DIR / f"{name}.ref.npy")
        img = jpeg_decode(data)
        mine = img.planes[0] if img.channels == 1 else np.transpose(img.planes, (1, 2, 0))
        worst = max(worst, int(np.abs(mine.astype(int) - ref.astype(int)).max()))
    assert worst <= 1
    report("codec", f"sizes {np.round(mean_sizes).tolist()} psnr "
                    f"{np.round(mean_psnrs, 2).tolist()} fixture maxdiff {worst}")


def test_numerical_kernels():
    """fdct/idct match the double-sum oracle and round-trip within 1e-6;
    conv2d matches the quadruple-loop oracle within 1e-5 over 1000 cases."""
    rng = np.random.default_rng(42)
    worst_dct = worst_rt = 0.0
    for _ in range(100):
        block = rng.uniform(-128, 127, (8, 8))
        worst_dct = max(worst_dct, float(np.abs(fdct8x8(block) - oracles.dct_double_sum(block)).max()))
        worst_rt = max(worst_rt, float(np.abs(idct8x8(fdct8x8(block)) - block).max()))
    assert worst_dct < 1e-6
    assert worst_rt < 1e-6

    worst_conv = 0.0
    for _ in range(1000):
        cin, cout = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        h, w = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        layer = ConvLayer(rng.standard_normal((cout, cin, 3, 3)).astype(np.float32),
                          rng.standard_normal(cout).astype(np.float32))
        x = rng.standard_normal((cin, h, w)).astype(np.float32)
        expected = oracles.conv2d_quad_loop(x, layer.weights, layer.bias)
        worst_conv = max(worst_conv, float(np.abs(conv2d(x, layer) - expected).max()))
    assert worst_conv < 1e-5
    report("kernels", f"dct err {worst_dct:.2e}, roundtrip {worst_rt:.2e}, "
                      f"conv err {worst_conv:.2e} over 1000 cases")


def test_zero_model_identity(tmp_path):
    """A DRCS file of zeros restores byte-identically to bicubic at every scale."""
    rng = np.random.default_rng(7)
    for sx, sy in ((1, 1), (2, 1), (2, 2), (4, 4)):
        path = tmp_path / f"zero_{sx}x{sy}.drcs"
        save_weights(zero_model(sx, sy), path)
        model = load_weights(path)
        lr = Image(rng.integers(0, 256, (3, 20, 24), np.uint8))
        out = drcas_forward(lr, model)
        base = bicubic_upscale(lr, sx, sy)
        assert np.array_equal(out.planes, base.planes), f"scale {sx}x{sy}"
    report("zero-model", "byte-identical to bicubic at 1x1, 2x1, 2x2, 4x4")


def test_parameter_count(tmp_path):
    """Default topology carries exactly 446,659 trainable weights."""
    model = zero_model(2, 2)
    assert model.param_count == 446_659
    path = tmp_path / "default.drcs"
    save_weights(model, path)
    assert load_weights(path).param_count == 446_659
    report("params", f"{model.param_count} == 446659 "
                     f"(C={model.feature_channels}, R={model.num_blocks})")


def test_truncation_bound_exhaustive():
    """|restore(truncate(p)) - p| <= 2^n - 1 over all byte values; zero at n=0."""
    all_values = Image(np.arange(256, dtype=np.uint8).reshape(1, 16, 16))
    bounds = {}
    for n in range(4):
        restored = restore_brightness(Image(truncate_bits(all_values, n).planes, 8), n)
        err = int(np.abs(restored.planes.astype(int) - all_values.planes.astype(int)).max())
        bounds[n] = err
        assert err <= (1 << n) - 1
    report("truncation", f"max |error| per n: {bounds}")

"""Secondary acceptance criteria: gradient check, cross-component agreement,
and the toy-training run (slow: roughly half an hour of CPU training).

Run everything:   pytest trainer/tests -q
Skip the slow:    pytest trainer/tests -q -m "not slow"
"""

import time

import numpy as np
import pytest
import torch

from conftest import HOLDOUT_IMAGES, TRAIN_IMAGES
from drcas_train import (
    DrcasNet,
    TrainConfig,
    build_pairs,
    evaluate_through_primary,
    gradient_check,
    make_tiny_setup,
    train,
)
from drcas_train.exporter import cross_check


def report(name, detail):
    print(f"[ACCEPTANCE-SECONDARY] {name}: {detail}")


def test_gradient_check_criterion():
    """Analytic vs central finite differences (step 1e-3, >=100 params):
    max relative error <= 1e-3; a severed skip connection must fail."""
    net, x, target = make_tiny_setup(seed=0)
    healthy = gradient_check(net, x, target, n_params=120)
    assert healthy <= 1e-3

    severed, x2, t2 = make_tiny_setup(detach_skip=True, seed=0)
    broken = gradient_check(severed, x2, t2, n_params=120)
    assert broken > 1e-1
    report("gradcheck", f"healthy {healthy:.2e} <= 1e-3; severed skip {broken:.2e} > 1e-1")


def test_cross_component_agreement(photo_dir, tmp_path):
    """Random-weight forward passes agree between this trainer and the primary
    engine within +-1 integer count per pixel on 20 patches."""
    torch.manual_seed(12)
    net = DrcasNet(channels=8, blocks=2, scale=(2, 2))
    with torch.no_grad():
        for p in net.parameters():
            p.uniform_(-0.08, 0.08)

    from drcas_train import primary_cli as cli

    photos = [cli.read_png(photo_dir / f"{n}.png")
              for n in ("coffee", "astronaut", "china", "camera", "flower")]
    rng = np.random.default_rng(2024)
    worst = 0
    for i in range(20):
        img = photos[i % len(photos)]
        y = int(rng.integers(0, img.shape[0] - 64))
        x = int(rng.integers(0, img.shape[1] - 64))
        worst = max(worst, cross_check(net, img[y : y + 64, x : x + 64],
                                       truncate=1, quality=90, workdir=tmp_path))
    assert worst <= 1
    report("cross-component", f"20 patches, max deviation {worst} count(s)")


@pytest.mark.slow
def test_toy_training_beats_bicubic(photo_dir, tmp_path):
    """Toy run at (2x2, N=1, Q=90): 2,000 patches, <=2 epochs, must beat the
    bicubic baseline by >= 0.2 dB mean PSNR on the 10 held-out images,
    evaluated end-to-end through the primary engine via an exported DRCS file.

    The reference corpus (DIV2K) is not bundled; the documented photo split in
    conftest stands in. Wall time is printed; the half-hour envelope assumes a
    multi-core laptop, not this CI box.
    """
    cfg = TrainConfig(2, 2, 1, 90, patch_size=128, samples_per_epoch=2000,
                      batch_size=16, epochs=2, learning_rate=1e-4, seed=7)
    train_paths = [photo_dir / f"{n}.png" for n in TRAIN_IMAGES]
    holdout_paths = [photo_dir / f"{n}.png" for n in HOLDOUT_IMAGES]
    assert len(holdout_paths) == 10

    t0 = time.time()
    records = build_pairs(train_paths, cfg, cfg.samples_per_epoch, workdir=tmp_path / "pairs")
    build_seconds = time.time() - t0

    t0 = time.time()
    final, losses = train(records, cfg, tmp_path / "run")
    train_seconds = time.time() - t0

    scores = evaluate_through_primary(final, holdout_paths, cfg, workdir=tmp_path / "eval")
    gain = scores["drcas"] - scores["bicubic"]
    report("toy-training",
           f"bicubic {scores['bicubic']:.3f} dB -> drcas {scores['drcas']:.3f} dB "
           f"(gain {gain:+.3f} dB) | data {build_seconds:.0f}s, "
           f"train {train_seconds / 60:.1f} min, losses {np.round(losses, 5).tolist()}")
    assert gain >= 0.2, f"gain {gain:.3f} dB below the 0.2 dB criterion"

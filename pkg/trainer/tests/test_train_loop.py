import numpy as np
import pytest
import torch

from drcas_train import TrainConfig, train
from drcas_train.dataset import PairRecord
from drcas_train.exporter import import_weights


def synthetic_records(rng, n, patch=16, bin_w=2, bin_h=2):
    """Fabricated pairs for exercising the loop (no CLI round trip needed)."""
    out = []
    for i in range(n):
        hr = rng.integers(0, 256, (patch, patch, 3), np.uint8)
        bicubic = np.clip(hr.astype(int) + rng.integers(-6, 7, hr.shape), 0, 255).astype(np.uint8)
        lr = hr[::bin_h, ::bin_w]
        out.append(PairRecord("synthetic", 0, 0, hr, lr, bicubic))
    return out


@pytest.fixture
def tiny_cfg():
    return TrainConfig(2, 2, 1, 90, patch_size=16, samples_per_epoch=24,
                       batch_size=8, epochs=3, channels=4, blocks=1,
                       learning_rate=1e-3, lr_halve_every=2, seed=3)


class TestTrainLoop:
    def test_loss_decreases_and_checkpoints_appear(self, tmp_path, tiny_cfg):
        rng = np.random.default_rng(0)
        records = synthetic_records(rng, tiny_cfg.samples_per_epoch)
        final, losses = train(records, tiny_cfg, tmp_path, log=lambda *_: None)
        assert final.exists()
        assert len(losses) == 3
        # monotone within a stochastic tolerance band
        assert losses[-1] <= losses[0] * 1.05
        for epoch in (1, 2, 3):
            assert (tmp_path / f"checkpoint_epoch{epoch}.drcs").exists()

    def test_final_weights_loadable_and_scaled(self, tmp_path, tiny_cfg):
        rng = np.random.default_rng(1)
        records = synthetic_records(rng, tiny_cfg.samples_per_epoch)
        final, _ = train(records, tiny_cfg, tmp_path, log=lambda *_: None)
        net = import_weights(final)
        assert net.scale == (2, 2)
        assert len(net.blocks) == 1

    def test_divergence_aborts_with_step(self, tmp_path, tiny_cfg):
        rng = np.random.default_rng(2)
        records = synthetic_records(rng, tiny_cfg.samples_per_epoch)
        bad = [PairRecord(r.source, r.x, r.y, r.hr, r.lr, r.bicubic) for r in records]
        import sys

        train_mod = sys.modules[train.__module__]
        original = train_mod.DrcasNet

        class ExplodingNet(original):
            def forward(self, x):
                return super().forward(x) * float("nan")

        train_mod.DrcasNet = ExplodingNet
        try:
            with pytest.raises(RuntimeError, match="step 0"):
                train(bad, tiny_cfg, tmp_path, log=lambda *_: None)
        finally:
            train_mod.DrcasNet = original

    def test_deterministic_for_seed(self, tmp_path, tiny_cfg):
        rng = np.random.default_rng(4)
        records = synthetic_records(rng, tiny_cfg.samples_per_epoch)
        a, _ = train(records, tiny_cfg, tmp_path / "a", log=lambda *_: None)
        b, _ = train(records, tiny_cfg, tmp_path / "b", log=lambda *_: None)
        assert a.read_bytes() == b.read_bytes()


class TestConfigFile:
    def test_load_config_section(self, tmp_path):
        from drcas_train import load_config

        cfg_file = tmp_path / "train.cfg"
        cfg_file.write_text(
            "[2x1-n2-q80]\nbin = 2x1\ntruncate = 2\nquality = 80\n"
            "patch_size = 64\nsamples_per_epoch = 500\nbatch_size = 16\n"
            "epochs = 2\nseed = 9\n")
        cfg = load_config(cfg_file)
        assert (cfg.bin_w, cfg.bin_h) == (2, 1)
        assert cfg.truncate_bits == 2
        assert cfg.quality == 80
        assert cfg.samples_per_epoch == 500
        assert cfg.tag() == "2x1_n2_q80"

    def test_missing_file(self, tmp_path):
        from drcas_train import load_config

        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "none.cfg")

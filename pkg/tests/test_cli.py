import math

import numpy as np
import pytest

from compacq import (
    AcquisitionConfig,
    Image,
    acquire,
    bicubic_upscale,
    jpeg_decode,
    load_image,
    restore_brightness,
    save_image,
    save_weights,
    zero_model,
)
from compacq.cli import main
from conftest import random_image


def run(argv):
    """Invoke the CLI; argparse usage errors surface as SystemExit(2)."""
    try:
        return main(argv)
    except SystemExit as e:
        return e.code


@pytest.fixture
def sample_png(tmp_path, rng):
    p = tmp_path / "in.png"
    save_image(random_image(rng, 3, 32, 32), p)
    return p


@pytest.fixture
def constant_png(tmp_path):
    p = tmp_path / "const.png"
    save_image(Image(np.full((3, 16, 16), 128, np.uint8)), p)
    return p


class TestAcquire:
    def test_writes_stream_and_sidecar(self, tmp_path, sample_png):
        out = tmp_path / "out.jpg"
        assert run(["acquire", str(sample_png), str(out),
                    "--bin", "2x2", "--truncate", "2", "--quality", "90"]) == 0
        assert out.exists()
        meta = (tmp_path / "out.jpg.meta").read_text()
        assert meta == "bin=2x2\ntruncate=2\nquality=90\n"

    def test_truncate_out_of_range_is_usage_error(self, tmp_path, sample_png, capsys):
        code = run(["acquire", str(sample_png), str(tmp_path / "o.jpg"), "--truncate", "4"])
        assert code == 2
        assert "usage" in capsys.readouterr().err

    def test_unsupported_bin_mode_is_usage_error(self, tmp_path, sample_png):
        assert run(["acquire", str(sample_png), str(tmp_path / "o.jpg"), "--bin", "3x3"]) == 2

    def test_quality_out_of_range_is_usage_error(self, tmp_path, sample_png):
        assert run(["acquire", str(sample_png), str(tmp_path / "o.jpg"), "--quality", "50"]) == 2

    def test_missing_input_is_runtime_error(self, tmp_path, capsys):
        code = run(["acquire", str(tmp_path / "none.png"), str(tmp_path / "o.jpg")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_deterministic_output_bytes(self, tmp_path, sample_png):
        a, b = tmp_path / "a.jpg", tmp_path / "b.jpg"
        run(["acquire", str(sample_png), str(a), "--bin", "2x1", "--quality", "80"])
        run(["acquire", str(sample_png), str(b), "--bin", "2x1", "--quality", "80"])
        assert a.read_bytes() == b.read_bytes()

    def test_stream_is_byte_identical_to_library_call(self, tmp_path, sample_png):
        out = tmp_path / "out.jpg"
        run(["acquire", str(sample_png), str(out), "--bin", "2x2",
             "--truncate", "1", "--quality", "85"])
        expected = acquire(load_image(sample_png), AcquisitionConfig(2, 2, 1, 85))
        assert out.read_bytes() == expected


class TestRestore:
    def test_lossless_path_round_trips(self, tmp_path, constant_png):
        jpg = tmp_path / "s.jpg"
        out = tmp_path / "restored.png"
        run(["acquire", str(constant_png), str(jpg), "--bin", "1x1",
             "--truncate", "0", "--quality", "100"])
        assert run(["restore", str(jpg), str(out), "--method", "bicubic"]) == 0
        assert load_image(out) == load_image(constant_png)

    def test_cli_matches_library(self, tmp_path, sample_png):
        jpg = tmp_path / "s.jpg"
        out = tmp_path / "r.png"
        run(["acquire", str(sample_png), str(jpg), "--bin", "2x2",
             "--truncate", "1", "--quality", "90"])
        run(["restore", str(jpg), str(out), "--method", "bicubic"])

        cfg = AcquisitionConfig(2, 2, 1, 90)
        stream = acquire(load_image(sample_png), cfg)
        expected = bicubic_upscale(restore_brightness(jpeg_decode(stream), 1), 2, 2)
        assert load_image(out) == expected

    def test_zero_weights_drcas_matches_bicubic(self, tmp_path, sample_png):
        jpg = tmp_path / "s.jpg"
        run(["acquire", str(sample_png), str(jpg), "--bin", "2x2", "--quality", "85"])
        weights = tmp_path / "zero.drcs"
        save_weights(zero_model(2, 2, channels=4, num_blocks=1), weights)
        out_b, out_d = tmp_path / "b.png", tmp_path / "d.png"
        run(["restore", str(jpg), str(out_b), "--method", "bicubic"])
        assert run(["restore", str(jpg), str(out_d), "--method", "drcas",
                    "--weights", str(weights)]) == 0
        assert out_b.read_bytes() == out_d.read_bytes()

    def test_drcas_without_weights_is_usage_error(self, tmp_path, sample_png, capsys):
        jpg = tmp_path / "s.jpg"
        run(["acquire", str(sample_png), str(jpg)])
        assert run(["restore", str(jpg), str(tmp_path / "o.png"), "--method", "drcas"]) == 2
        assert "--weights" in capsys.readouterr().err

    def test_scale_mismatch_is_usage_error(self, tmp_path, sample_png, capsys):
        jpg = tmp_path / "s.jpg"
        run(["acquire", str(sample_png), str(jpg), "--bin", "2x2"])
        weights = tmp_path / "w.drcs"
        save_weights(zero_model(4, 4, channels=4, num_blocks=1), weights)
        code = run(["restore", str(jpg), str(tmp_path / "o.png"),
                    "--method", "drcas", "--weights", str(weights)])
        assert code == 2
        err = capsys.readouterr().err
        assert "4x4" in err and "2x2" in err

    def test_flag_overrides_beat_sidecar(self, tmp_path, sample_png):
        jpg = tmp_path / "s.jpg"
        run(["acquire", str(sample_png), str(jpg), "--bin", "2x2", "--truncate", "1"])
        out = tmp_path / "lr.png"
        assert run(["restore", str(jpg), str(out), "--method", "bicubic",
                    "--bin", "1x1"]) == 0
        lr = load_image(out)
        assert (lr.width, lr.height) == (16, 16)  # no upscaling applied

    def test_missing_sidecar_without_flags_is_usage_error(self, tmp_path, sample_png):
        jpg = tmp_path / "s.jpg"
        run(["acquire", str(sample_png), str(jpg)])
        (tmp_path / "s.jpg.meta").unlink()
        assert run(["restore", str(jpg), str(tmp_path / "o.png"),
                    "--method", "bicubic"]) == 2


class TestEval:
    def test_identical_prints_inf(self, tmp_path, constant_png, capsys):
        assert run(["eval", "--ref", str(constant_png), "--test", str(constant_png)]) == 0
        assert capsys.readouterr().out.strip() == "inf"

    def test_full_swing_prints_zero(self, tmp_path, capsys):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_image(Image(np.zeros((3, 4, 4), np.uint8)), a)
        save_image(Image(np.full((3, 4, 4), 255, np.uint8)), b)
        run(["eval", "--ref", str(a), "--test", str(b)])
        assert capsys.readouterr().out.strip() == "0.00"

    def test_known_single_error_case(self, tmp_path, capsys):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_image(Image(np.full((1, 2, 2), 100, np.uint8)), a)
        arr = np.full((1, 2, 2), 100, np.uint8)
        arr[0, 0, 0] = 116
        save_image(Image(arr), b)
        run(["eval", "--ref", str(a), "--test", str(b)])
        assert capsys.readouterr().out.strip() == "30.07"


class TestAnalyze:
    def test_rawcomp_reproduces_reference_table(self, tmp_path):
        out = tmp_path / "rawcomp.csv"
        assert run(["analyze", "--mode", "rawcomp", "--out", str(out)]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "bin,binned_pixels,bitwidth,fraction,percent"
        rows = [l.split(",") for l in lines[1:]]
        assert len(rows) == 12
        percents = {(r[0], r[2]): r[4] for r in rows}
        assert percents[("2x2", "8")] == "75"
        assert percents[("4x4", "5")] == "96.09"
        assert percents[("2x1", "6")] == "62.5"

    def test_switching_constant_image_zero_row(self, tmp_path, constant_png, capsys):
        data = tmp_path / "ds"
        data.mkdir()
        (data / "c.png").write_bytes(constant_png.read_bytes())
        out = tmp_path / "sw.csv"
        assert run(["analyze", "--mode", "switching", "--dataset", str(data),
                    "--out", str(out)]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        row = lines[1].split(",")
        assert row[0] == "c.png"
        assert all(float(v) == 0.0 for v in row[1:])

    def test_missing_dataset_dir_is_runtime_error(self, tmp_path):
        code = run(["analyze", "--mode", "switching",
                    "--dataset", str(tmp_path / "nope"), "--out", str(tmp_path / "o.csv")])
        assert code == 1

    def test_dataset_required_for_non_rawcomp(self, tmp_path):
        assert run(["analyze", "--mode", "switching", "--out", str(tmp_path / "o.csv")]) == 2

    def test_size_mode_covers_full_grid(self, tmp_path, rng):
        d = tmp_path / "ds"
        d.mkdir()
        save_image(random_image(rng, 3, 16, 16), d / "a.png")
        out = tmp_path / "size.csv"
        assert run(["analyze", "--mode", "size", "--dataset", str(d),
                    "--out", str(out), "--workers", "1"]) == 0
        rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(rows) == 1 + 48  # header + 3 bins x 4 truncations x 4 qualities

    def test_table1_mode_picks_up_weights_dir(self, tmp_path, rng):
        d = tmp_path / "ds"
        d.mkdir()
        save_image(random_image(rng, 3, 16, 16), d / "a.png")
        wdir = tmp_path / "weights"
        wdir.mkdir()
        save_weights(zero_model(2, 2, channels=4, num_blocks=1),
                     wdir / "drcas_2x2_n1_q90.drcs")
        out = tmp_path / "t1.csv"
        assert run(["analyze", "--mode", "table1", "--dataset", str(d),
                    "--out", str(out), "--workers", "1", "--weights-dir", str(wdir)]) == 0
        rows = [l.split(",") for l in out.read_text().splitlines() if not l.startswith("#")]
        header, data = rows[0], rows[1:]
        assert len(data) == 48
        drcas_col = header.index("psnr_drcas")
        restorer_col = header.index("restorer")
        matched = [r for r in data if r[restorer_col] == "drcas_2x2_n1_q90.drcs"]
        assert len(matched) == 1
        bicubic_col = header.index("psnr_bicubic")
        assert matched[0][drcas_col] == matched[0][bicubic_col]  # zero model == bicubic
        others = [r for r in data if r[restorer_col] == "bicubic"]
        assert all(r[drcas_col] == "" for r in others)


class TestPipeline:
    def _dataset(self, tmp_path, rng):
        d = tmp_path / "ds"
        d.mkdir()
        save_image(random_image(rng, 3, 16, 16), d / "a.png")
        return d

    def test_empty_config_is_usage_error(self, tmp_path, capsys):
        cfg = tmp_path / "runs.cfg"
        cfg.write_text("")
        code = run(["pipeline", "--config", str(cfg), "--out", str(tmp_path / "o.csv")])
        assert code == 2

    def test_single_section_runs(self, tmp_path, rng):
        d = self._dataset(tmp_path, rng)
        cfg = tmp_path / "runs.cfg"
        cfg.write_text("[run1]\nbin = 2x2\ntruncate = 1\nquality = 90\n")
        out = tmp_path / "o.csv"
        assert run(["pipeline", "--config", str(cfg), "--dataset", str(d),
                    "--out", str(out), "--workers", "1"]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 2
        assert lines[1].startswith("2x2,1,90,bicubic,")

    def test_full_grid_sections(self, tmp_path, rng):
        d = self._dataset(tmp_path, rng)
        sections = []
        for mode in ("2x1", "2x2", "4x4"):
            for n in range(4):
                for q in (70, 80, 90, 100):
                    sections.append(f"[{mode}-n{n}-q{q}]\nbin={mode}\ntruncate={n}\nquality={q}\n")
        cfg = tmp_path / "grid.cfg"
        cfg.write_text("\n".join(sections))
        out = tmp_path / "o.csv"
        assert run(["pipeline", "--config", str(cfg), "--dataset", str(d),
                    "--out", str(out), "--workers", "1"]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 1 + 48

    def test_bad_section_is_usage_error(self, tmp_path, rng, capsys):
        d = self._dataset(tmp_path, rng)
        cfg = tmp_path / "runs.cfg"
        cfg.write_text("[run1]\nbin = 3x3\n")
        assert run(["pipeline", "--config", str(cfg), "--dataset", str(d),
                    "--out", str(tmp_path / "o.csv")]) == 2

    def test_unreadable_config_is_runtime_error(self, tmp_path):
        assert run(["pipeline", "--config", str(tmp_path / "none.cfg"),
                    "--out", str(tmp_path / "o.csv")]) == 1

"""Image files, distribution dumps, the pipeline and the CLI front end."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stochastic_disparity.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, main
from stochastic_disparity.dump import (
    DistributionDump,
    DumpFormatError,
    read_dump,
    write_dump,
)
from stochastic_disparity.pgm import (
    ImageFileMissingError,
    ImageFormatError,
    load_image,
    save_image,
)
from stochastic_disparity.pipeline import RunConfig, run_pipeline
from stochastic_disparity.synthetic import planted_shift_pair


def write_pair(tmp_path, width=36, height=12, shift=4, seed=6, noise=15.0):
    left, right = planted_shift_pair(width, height, shift, seed, noise_sigma=noise)
    lp, rp = tmp_path / "left.pgm", tmp_path / "right.pgm"
    save_image(lp, left)
    save_image(rp, right)
    return lp, rp


class TestPgm:
    @settings(max_examples=20, deadline=None)
    @given(
        img=arrays(
            np.uint8,
            st.tuples(st.integers(1, 12), st.integers(1, 12)),
            elements=st.integers(0, 255),
        )
    )
    def test_round_trip_is_bit_identical(self, img, tmp_path_factory):
        path = tmp_path_factory.mktemp("pgm") / "img.pgm"
        save_image(path, img)
        assert np.array_equal(load_image(path), img)

    def test_header_comments_and_whitespace(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n 2  1\n# another\n255\n\x07\x09")
        assert np.array_equal(load_image(path), [[7, 9]])

    def test_color_input_converts_via_integer_luma(self, tmp_path):
        path = tmp_path / "c.ppm"
        rgb = bytes([200, 10, 30, 0, 255, 0])
        path.write_bytes(b"P6\n2 1\n255\n" + rgb)
        img = load_image(path)
        assert img[0, 0] == (77 * 200 + 150 * 10 + 29 * 30) >> 8
        assert img[0, 1] == (150 * 255) >> 8

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageFileMissingError):
            load_image(tmp_path / "nope.pgm")

    @pytest.mark.parametrize(
        "data",
        [
            b"P3\n1 1\n255\n0",
            b"P5\n2 2\n65535\n\x00\x00\x00\x00",
            b"P5\n2 2\n255\n\x00",  # truncated raster
            b"P5\n0 2\n255\n",
            b"P5\n2",
        ],
    )
    def test_malformed_files_rejected(self, tmp_path, data):
        path = tmp_path / "bad.pgm"
        path.write_bytes(data)
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_save_rejects_out_of_range(self, tmp_path):
        with pytest.raises(ImageFormatError):
            save_image(tmp_path / "x.pgm", np.full((2, 2), 300))


def tiny_dump(d_max=2, n_max=16):
    rng = np.random.default_rng(0)
    h, w = 3, d_max + 4
    counts = rng.integers(0, n_max + 1, (h, w - d_max, d_max + 2)).astype(np.uint16)
    no_match = rng.random((h, w)) < 0.3
    invalid = np.zeros((h, w), bool)
    invalid[:, :d_max] = True
    return DistributionDump(w, h, d_max, n_max, counts, no_match, invalid)


class TestDump:
    def test_round_trip(self, tmp_path):
        dump = tiny_dump()
        path = tmp_path / "d.bin"
        write_dump(path, dump)
        back = read_dump(path)
        assert (back.width, back.height, back.d_max, back.n_max) == (
            dump.width,
            dump.height,
            dump.d_max,
            dump.n_max,
        )
        assert np.array_equal(back.counts, dump.counts)
        assert np.array_equal(back.no_match, dump.no_match)
        assert np.array_equal(back.invalid, dump.invalid)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "d.bin"
        write_dump(path, tiny_dump())
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(DumpFormatError):
            read_dump(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "d.bin"
        write_dump(path, tiny_dump())
        data = bytearray(path.read_bytes())
        data[4] = 99
        path.write_bytes(bytes(data))
        with pytest.raises(DumpFormatError):
            read_dump(path)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "d.bin"
        write_dump(path, tiny_dump())
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(DumpFormatError):
            read_dump(path)

    def test_count_range_enforced_on_write(self, tmp_path):
        dump = tiny_dump()
        bad = DistributionDump(
            dump.width,
            dump.height,
            dump.d_max,
            dump.n_max,
            dump.counts + dump.n_max,  # exceeds n_max
            dump.no_match,
            dump.invalid,
        )
        with pytest.raises(DumpFormatError):
            write_dump(tmp_path / "d.bin", bad)

    def test_oversized_n_max_rejected(self, tmp_path):
        dump = tiny_dump()
        bad = DistributionDump(
            dump.width,
            dump.height,
            dump.d_max,
            1 << 16,
            dump.counts,
            dump.no_match,
            dump.invalid,
        )
        with pytest.raises(DumpFormatError):
            write_dump(tmp_path / "d.bin", bad)


class TestPipeline:
    def test_artifacts_and_dump_contents(self, tmp_path):
        lp, rp = write_pair(tmp_path)
        config = RunConfig(
            left_path=lp,
            right_path=rp,
            params=__import__(
                "stochastic_disparity"
            ).ModelParams(d_max=8),
            n_max=16,
            seed=3,
            reference_image_out=tmp_path / "ref.pgm",
            stochastic_image_out=tmp_path / "sto.pgm",
            dump_out=tmp_path / "counts.bin",
        )
        summary = run_pipeline(config)
        assert summary.reference is not None and summary.stochastic is not None
        ref_img = load_image(tmp_path / "ref.pgm")
        sto_img = load_image(tmp_path / "sto.pgm")
        assert ref_img.shape == sto_img.shape == (8, 32)
        # x < d_max border renders black and is marked invalid in the dump
        assert not ref_img[:, :8].any()
        dump = read_dump(tmp_path / "counts.bin")
        assert dump.d_max == 8 and dump.n_max == 16
        assert np.all(dump.invalid[:, :8])
        assert not dump.invalid[:, 8:].any()
        assert np.array_equal(
            dump.counts, summary.stochastic.counts.astype(np.uint16)
        )

    def test_mismatched_pair_rejected(self, tmp_path):
        lp, _ = write_pair(tmp_path)
        other = tmp_path / "other.pgm"
        save_image(other, np.zeros((5, 40), dtype=np.uint8))
        from stochastic_disparity import ModelParams

        config = RunConfig(left_path=lp, right_path=other, params=ModelParams(d_max=8))
        with pytest.raises(ValueError):
            run_pipeline(config)

    def test_crop_validation(self, tmp_path):
        lp, rp = write_pair(tmp_path)
        from stochastic_disparity import ModelParams

        config = RunConfig(
            left_path=lp,
            right_path=rp,
            params=ModelParams(d_max=8),
            crop=(30, 0, 20, 10),
        )
        with pytest.raises(ValueError):
            run_pipeline(config)

    def test_config_validation(self, tmp_path):
        lp, rp = write_pair(tmp_path)
        with pytest.raises(ValueError):
            RunConfig(left_path=lp, right_path=rp, mode="bogus")
        with pytest.raises(ValueError):
            RunConfig(left_path=lp, right_path=rp, n_max=0)
        with pytest.raises(ValueError):
            RunConfig(left_path=lp, right_path=rp, workers=0)


class TestCli:
    def disparity_args(self, tmp_path, lp, rp, tag=""):
        return [
            "disparity",
            "--left",
            str(lp),
            "--right",
            str(rp),
            "--d-max",
            "8",
            "--n-max",
            "16",
            "--seed",
            "5",
            "--ref-out",
            str(tmp_path / f"ref{tag}.pgm"),
            "--stoch-out",
            str(tmp_path / f"sto{tag}.pgm"),
            "--dump-out",
            str(tmp_path / f"dump{tag}.bin"),
        ]

    def test_disparity_runs_and_is_deterministic(self, tmp_path, capsys):
        lp, rp = write_pair(tmp_path)
        assert main(self.disparity_args(tmp_path, lp, rp, "a")) == EXIT_OK
        assert main(self.disparity_args(tmp_path, lp, rp, "b")) == EXIT_OK
        for stem in ("ref", "sto", "dump"):
            ext = "bin" if stem == "dump" else "pgm"
            a = (tmp_path / f"{stem}a.{ext}").read_bytes()
            b = (tmp_path / f"{stem}b.{ext}").read_bytes()
            assert a == b
        # cycle statistics go to stderr, not stdout
        captured = capsys.readouterr()
        assert "cycles/pixel" in captured.err
        assert captured.out == ""

    def test_sweep_csv(self, tmp_path):
        lp, rp = write_pair(tmp_path)
        out = tmp_path / "sweep.csv"
        args = [
            "sweep",
            "--left",
            str(lp),
            "--right",
            str(rp),
            "--d-max",
            "8",
            "--n-max-list",
            "1,16",
            "--out",
            str(out),
        ]
        assert main(args) == EXIT_OK
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n_max,rms,f1,cycles_mean,cycles_sd,timeouts"
        assert len(lines) == 3

    def test_estimate_prints_projection(self, capsys):
        args = ["estimate", "--cycles-per-pixel", "27.97"]
        assert main(args) == EXIT_OK
        out = dict(
            line.split("=") for line in capsys.readouterr().out.strip().split("\n")
        )
        assert out["n_generators"] == "246"
        assert float(out["power_mw"]) == pytest.approx(12.3)
        assert out["valid_pixels"] == "264656"
        assert out["cycles_per_image"] == "7402428.32"
        assert float(out["frames_per_second"]) == pytest.approx(67.5, abs=0.1)

    def test_compare_between_dumps(self, tmp_path, capsys):
        lp, rp = write_pair(tmp_path)
        assert main(self.disparity_args(tmp_path, lp, rp, "a")) == EXIT_OK
        args = [
            "compare",
            str(tmp_path / "dumpa.bin"),
            str(tmp_path / "dumpa.bin"),
        ]
        assert main(args) == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "rms,f1,n_matched"
        rms, f1, n = lines[1].split(",")
        assert float(rms) == 0.0
        assert float(f1) == 1.0
        assert int(n) > 0

    def test_missing_input_exits_with_io_code(self, tmp_path, capsys):
        args = [
            "disparity",
            "--left",
            str(tmp_path / "absent.pgm"),
            "--right",
            str(tmp_path / "absent.pgm"),
        ]
        assert main(args) == EXIT_IO
        assert "error:" in capsys.readouterr().err

    def test_truncated_image_exits_with_io_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"P5\n4 4\n255\n\x00")
        args = ["disparity", "--left", str(bad), "--right", str(bad)]
        assert main(args) == EXIT_IO

    def test_validation_error_exits_with_code_2(self, tmp_path, capsys):
        lp, rp = write_pair(tmp_path)
        # d_max too large for this pair: no valid pixels
        args = ["disparity", "--left", str(lp), "--right", str(rp), "--d-max", "80"]
        assert main(args) == EXIT_VALIDATION

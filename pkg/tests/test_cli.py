import csv
import dataclasses
import os
from unittest import mock

import numpy as np
import pytest

from degflow import training, version
from degflow.autodiff.checkpoint import load_checkpoint, save_checkpoint
from degflow.cli import commands, main, studies
from degflow.cli.manifest import read_manifest
from degflow.enums import StudyKind
from degflow.exceptions import (
    EXIT_CONFIG_ERROR,
    EXIT_DATA_ERROR,
    EXIT_NUMERICAL_ERROR,
    ConfigError,
    NonFiniteError,
)
from degflow.imaging.io import load_image, save_image
from degflow.settings import RunConfig
from tests import fixtures


def _read_csv(path):
    with open(path, newline="") as fp:
        return list(csv.reader(fp))


class TestMain:
    def test_version(self, capsys):
        assert main.main(["version"]) == 0
        assert capsys.readouterr().out.strip() == version.__version__

    def test_bad_config_exit_code(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("seed = 1\nbogus = 2\n")
        assert main.main(["--config", str(path), "train"]) == EXIT_CONFIG_ERROR

    def test_bad_log_level_exit_code(self):
        assert main.main(["--log-level", "chatty", "version"]) == EXIT_CONFIG_ERROR

    def test_missing_checkpoint_exit_code(self, tmp_path):
        args = ["--out", str(tmp_path), "synthesize", "--hr-dir", str(tmp_path)]
        assert main.main(args) == EXIT_DATA_ERROR

    def test_numerical_error_exit_code(self):
        with mock.patch.object(
            commands, "cmd_train", side_effect=NonFiniteError("Euler state at step 3")
        ):
            assert main.main(["--quiet", "train"]) == EXIT_NUMERICAL_ERROR

    def test_overrides_reach_the_command(self):
        with mock.patch.object(commands, "cmd_synthesize") as synthesize:
            code = main.main(
                ["--seed", "9", "--out", "runs/x", "synthesize", "--skip-rfdm"]
            )
        assert code == 0
        config, hr_dir, skip_fgdm, skip_rfdm = synthesize.call_args.args
        assert (config.seed, config.out_dir) == (9, "runs/x")
        assert (hr_dir, skip_fgdm, skip_rfdm) == (None, False, True)

    def test_study_dispatch(self):
        with mock.patch.object(studies, "cmd_study") as cmd_study:
            assert main.main(["study", "--study", "K"]) == 0
        assert cmd_study.call_args.args[1] == "K"

    def test_unknown_study_is_rejected_by_the_parser(self):
        with pytest.raises(SystemExit):
            main.main(["study", "--study", "nope"])

    def test_quiet_disables_progress(self):
        with mock.patch.object(commands, "cmd_gen_corpus"):
            main.main(["--quiet", "gen-corpus"])
        assert not training.progress_enabled
        with mock.patch.object(commands, "cmd_gen_corpus"):
            main.main(["gen-corpus"])
        assert training.progress_enabled


def test_skip_reasons():
    assert commands._skip_reason((64, 64, 3), True, True, 4) is None
    assert "not divisible by 4" in commands._skip_reason((30, 32, 3), True, True, 4)
    assert "DT-LR" in commands._skip_reason((24, 24, 3), True, False, 4)
    assert commands._skip_reason((24, 24, 3), False, False, 4) is None
    assert commands._skip_reason((40, 40, 3), False, True, 4) is not None


def test_unknown_study():
    with pytest.raises(ConfigError):
        studies.cmd_study(RunConfig(), "nope")


class TestPipeline(fixtures.DeskCorpusTests):
    @pytest.fixture
    def trained(self, config):
        commands.cmd_train(config)
        return config

    def test_train_outputs(self, trained):
        out = trained.out_dir
        for name in ("fgdm.dgfw", "rfdm.dgfw", "config.txt", "summary.txt"):
            assert os.path.isfile(os.path.join(out, name))
        assert RunConfig.from_file(os.path.join(out, "config.txt")) == trained
        loss = _read_csv(os.path.join(out, "fgdm_loss.csv"))
        assert loss[0] == ["step", "loss"]
        assert len(loss) == 1 + trained.fgdm_steps
        summary = open(os.path.join(out, "summary.txt")).read()
        assert f"seed {trained.seed}" in summary
        assert "first-window loss" in summary

    def test_zero_steps_summary(self, config):
        config = config.with_overrides(fgdm_steps=0, rfdm_steps=0)
        commands.cmd_train(config)
        summary = open(os.path.join(config.out_dir, "summary.txt")).read()
        assert summary.count("zero training steps: identity checkpoint") == 2

    def test_synthesize_and_evaluate(self, trained, corpus_root):
        heldout = corpus_root / "heldout"
        manifest_path, rows = commands.cmd_synthesize(trained, str(heldout / "hr"))
        assert manifest_path == os.path.join(trained.out_dir, "synth", "manifest.csv")
        assert [os.path.basename(r.lr_path) for r in rows] == ["0000.png", "0001.png"]
        assert all(len(r.fgdm_ckpt) == 16 and len(r.rfdm_ckpt) == 16 for r in rows)
        assert load_image(rows[0].lr_path).shape == (16, 16, 3)
        assert read_manifest(manifest_path)[0] == rows

        reports = commands.cmd_evaluate(manifest_path, str(heldout / "lr_real"))
        assert len(reports) == 2
        table = _read_csv(os.path.join(trained.out_dir, "synth", "evaluation.csv"))
        assert table[0] == ["name", "psnr", "ssim"]
        assert [r[0] for r in table[1:]] == ["0000.png", "0001.png", "mean"]
        assert all(len(v.split(".")[1]) == 4 for r in table[1:] for v in r[1:])

    def test_synthesize_skips_odd_sizes(self, trained, tmp_path):
        hr_dir = tmp_path / "hr"
        save_image(np.full((64, 64, 3), 0.5), str(hr_dir / "a.png"))
        save_image(np.full((30, 30, 3), 0.5), str(hr_dir / "b.png"))
        manifest_path, rows = commands.cmd_synthesize(trained, str(hr_dir))
        assert len(rows) == 1
        _, skipped = read_manifest(manifest_path)
        assert skipped[0][0].endswith("b.png")

    def test_skip_modules(self, trained, corpus_root):
        hr_dir = str(corpus_root / "heldout" / "hr")
        _, rows = commands.cmd_synthesize(trained, hr_dir, skip_fgdm=True)
        assert rows[0].fgdm_ckpt == "none" and rows[0].rfdm_ckpt != "none"
        _, rows = commands.cmd_synthesize(trained, hr_dir, True, True)
        lr_bi = load_image(str(corpus_root / "heldout" / "lr_bi" / "0000.png"))
        np.testing.assert_array_equal(load_image(rows[0].lr_path), lr_bi)

    def test_rows_record_the_euler_steps(self, trained, corpus_root):
        hr_dir = str(corpus_root / "heldout" / "hr")
        _, rows = commands.cmd_synthesize(trained, hr_dir)
        assert [r.euler_steps for r in rows] == [trained.euler_steps] * 2
        _, rows = commands.cmd_synthesize(trained, hr_dir, skip_rfdm=True)
        assert [r.euler_steps for r in rows] == [0, 0]

    def test_size_check_uses_the_checkpoint_scale(self, trained, corpus_root):
        # 64x64 is not divisible by 3; the FGDM checkpoint was trained at 4
        config = trained.with_overrides(dtlr_scale=3)
        _, rows = commands.cmd_synthesize(config, str(corpus_root / "heldout" / "hr"))
        assert len(rows) == 2

    def test_malformed_checkpoint_exit_code(self, trained, corpus_root):
        path = os.path.join(trained.out_dir, "fgdm.dgfw")
        tensors = load_checkpoint(path)
        tensors["fgdm.meta.arch"] = tensors["fgdm.meta.arch"][:2]
        save_checkpoint(path, tensors)
        args = ["--out", trained.out_dir, "--quiet", "synthesize"]
        args += ["--hr-dir", str(corpus_root / "heldout" / "hr")]
        assert main.main(args) == EXIT_DATA_ERROR

    def test_evaluate_unresolved_reference(self, trained, corpus_root, tmp_path):
        manifest_path, _ = commands.cmd_synthesize(
            trained, str(corpus_root / "heldout" / "hr")
        )
        with pytest.raises(commands.ManifestError):
            commands.cmd_evaluate(manifest_path, str(tmp_path))

    def test_eval_crop(self, trained, corpus_root):
        heldout = corpus_root / "heldout"
        manifest_path, _ = commands.cmd_synthesize(trained, str(heldout / "hr"))
        full = commands.cmd_evaluate(manifest_path, str(heldout / "lr_real"))
        cropped = commands.cmd_evaluate(
            manifest_path, str(heldout / "lr_real"), eval_crop=12
        )
        assert full[0][1].psnr != cropped[0][1].psnr

    def test_runs_are_reproducible(self, config, corpus_root, tmp_path):
        twin = config.with_overrides(out_dir=str(tmp_path / "twin"))
        hr_dir = str(corpus_root / "heldout" / "hr")
        outputs = []
        for run in (config, twin):
            commands.cmd_train(run)
            _, rows = commands.cmd_synthesize(run, hr_dir)
            outputs.append(rows)
        for name in ("fgdm.dgfw", "rfdm.dgfw"):
            a = open(os.path.join(config.out_dir, name), "rb").read()
            b = open(os.path.join(twin.out_dir, name), "rb").read()
            assert a == b
        for a, b in zip(*outputs):
            assert open(a.lr_path, "rb").read() == open(b.lr_path, "rb").read()
            assert dataclasses.astuple(a)[2:] == dataclasses.astuple(b)[2:]

    def test_gen_corpus_command(self, config, tmp_path):
        layout = commands.cmd_gen_corpus(config, str(tmp_path / "desk"))
        assert len(layout.lr_files) == config.corpus_train_images
        assert len(layout.hr_files) == config.corpus_hr_images

    @pytest.mark.parametrize(
        "study,header,rows",
        [
            (StudyKind.DTLR, ["iters", "psnr", "ssim"], 3),
            (StudyKind.FILTER, ["filter", "iters", "psnr", "ssim"], 9),
            (StudyKind.K, ["K", "psnr"], len(studies.K_SWEEP)),
            (StudyKind.LAMBDA, ["lambda", "psnr"], len(studies.LAMBDA_SWEEP)),
            (
                StudyKind.SWAP,
                ["name", "edge_ssim_amp_source", "edge_ssim_phase_source"],
                4,
            ),
        ],
    )
    def test_studies(self, trained, study, header, rows):
        path = studies.cmd_study(trained, study.value)
        assert path == os.path.join(trained.out_dir, "studies", f"{study.value}.csv")
        table = _read_csv(path)
        assert table[0] == header
        assert len(table) == 1 + rows


def test_config_error_message():
    assert str(ConfigError("unknown key 'bogus'", 2)) == "line 2: unknown key 'bogus'"
    assert str(ConfigError("seed must be an integer")) == "seed must be an integer"

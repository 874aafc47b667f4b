import numpy as np
import pytest

from degflow import fourier
from degflow.autodiff.checkpoint import load_checkpoint, save_checkpoint
from degflow.enums import FilterKind
from degflow.exceptions import CheckpointError, CorpusEmptyError
from degflow.fgdm.aenet import AENet
from degflow.fgdm.module import (
    FgdmCheckpoint,
    fgdm_apply,
    fgdm_apply_batch,
    fgdm_train,
)
from degflow.models import AENetConfig, DtlrSpec, TrainConfig
from degflow.resample import dtlr
from tests import fixtures

SMALL = AENetConfig(base_channels=3, residual_blocks=1)
TRAIN = TrainConfig(steps=3, batch_size=2, patch_size=8, learning_rate=1e-3)
DTLR = DtlrSpec(iterations=2, scale=2)


@pytest.fixture(scope="module")
def corpus():
    return [fixtures.noisy_image(i, 16, 16) for i in range(3)]


@pytest.fixture(scope="module")
def trained(corpus):
    return fgdm_train(corpus, DTLR, SMALL, TRAIN, seed=1)


class TestFgdmApply:
    def test_zero_iterations_with_fresh_network_returns_the_input(self):
        img = fixtures.noisy_image(0)
        checkpoint = FgdmCheckpoint(AENet(SMALL), DtlrSpec(iterations=0))
        np.testing.assert_allclose(fgdm_apply(img, checkpoint), img, atol=1e-10)

    def test_fresh_network_swaps_in_the_dtlr_amplitude(self):
        img = fixtures.noisy_image(1)
        checkpoint = FgdmCheckpoint(AENet(SMALL), DTLR)
        out = fgdm_apply(img, checkpoint)
        amp = fourier.amp_phase(fourier.fft2(dtlr(img, DTLR))).amplitude
        phase = fourier.amp_phase(fourier.fft2(img)).phase
        expected = fourier.ifft2(fourier.hermitian_part(fourier.recombine(amp, phase)))
        np.testing.assert_allclose(out, expected, atol=1e-8)

    def test_stripes_with_empty_frequency_bins(self):
        x = np.arange(32)
        row = 0.5 + 0.4 * np.sin(2 * np.pi * x / 8)
        img = np.repeat(np.tile(row, (32, 1))[:, :, None], 3, axis=2)
        checkpoint = FgdmCheckpoint(AENet(AENetConfig(4, 1, 3)), DtlrSpec(iterations=2))
        out = fgdm_apply(img, checkpoint)
        assert out.shape == img.shape
        assert np.all(np.isfinite(out))
        # a stripe pattern stays a stripe pattern: every row is the same
        np.testing.assert_allclose(out, np.broadcast_to(out[:1], out.shape), atol=1e-9)

    def test_constant_image_stays_constant(self):
        img = np.full((16, 16, 3), 0.37)
        checkpoint = FgdmCheckpoint(AENet(SMALL), DTLR)
        np.testing.assert_allclose(fgdm_apply(img, checkpoint), img, atol=1e-9)

    def test_output_keeps_the_input_phase(self, trained):
        checkpoint, _ = trained
        img = fixtures.noisy_image(5)
        source = fourier.fft2(img).values
        result = fourier.fft2(fgdm_apply(img, checkpoint)).values
        mask = (np.abs(source) > 1e-6) & (np.abs(result) > 1e-9)
        drift = np.angle(result[mask] * np.conj(source[mask]))
        assert mask.sum() > source.size // 2
        np.testing.assert_allclose(drift, 0.0, atol=1e-4)

    def test_spec_override(self):
        img = fixtures.noisy_image(2)
        checkpoint = FgdmCheckpoint(AENet(SMALL), DTLR)
        out = fgdm_apply(img, checkpoint, DtlrSpec(iterations=0))
        np.testing.assert_allclose(out, img, atol=1e-10)
        assert checkpoint.dtlr == DTLR

    def test_batch_matches_single(self, trained):
        checkpoint, _ = trained
        images = [fixtures.noisy_image(i) for i in range(2)]
        batch = fgdm_apply_batch(images, checkpoint)
        for img, out in zip(images, batch):
            np.testing.assert_allclose(fgdm_apply(img, checkpoint), out, atol=1e-5)

    def test_output_is_real_and_sized(self, trained):
        checkpoint, _ = trained
        out = fgdm_apply(fixtures.noisy_image(3, 8, 12), checkpoint)
        assert out.shape == (8, 12, 3)
        assert out.dtype == np.float64


class TestFgdmTrain:
    def test_losses(self, trained):
        checkpoint, losses = trained
        assert len(losses) == 3
        assert all(np.isfinite(losses))
        assert checkpoint.steps == 3
        assert checkpoint.loss_tail == losses
        assert checkpoint.dtlr == DTLR

    def test_training_moves_the_network(self, trained):
        checkpoint, _ = trained
        assert np.any(checkpoint.net.tail.weight.data)

    def test_deterministic(self, corpus, trained):
        checkpoint, losses = fgdm_train(corpus, DTLR, SMALL, TRAIN, seed=1)
        assert losses == trained[1]
        for (_, a), (_, b) in zip(
            checkpoint.net.named_parameters(), trained[0].net.named_parameters()
        ):
            np.testing.assert_array_equal(a.data, b.data)

    def test_zero_steps_is_the_identity_network(self, corpus):
        checkpoint, losses = fgdm_train(
            corpus, DTLR, SMALL, TrainConfig(steps=0, patch_size=8)
        )
        assert losses == []
        assert not np.any(checkpoint.net.tail.weight.data)

    def test_empty_corpus(self):
        with pytest.raises(CorpusEmptyError):
            fgdm_train([], DTLR, SMALL, TRAIN)


class TestFgdmCheckpoint:
    def test_round_trip(self, tmp_path, trained):
        checkpoint, _ = trained
        path = str(tmp_path / "fgdm.dgfw")
        checkpoint.save(path)
        loaded = FgdmCheckpoint.load(path)
        assert loaded.dtlr == DTLR
        assert loaded.steps == 3
        assert loaded.net.config == SMALL
        np.testing.assert_allclose(loaded.loss_tail, checkpoint.loss_tail, rtol=1e-6)
        img = fixtures.noisy_image(4)
        np.testing.assert_array_equal(
            fgdm_apply(img, loaded), fgdm_apply(img, checkpoint)
        )

    def test_filter_is_stored(self, tmp_path):
        spec = DtlrSpec(3, 2, FilterKind.LANCZOS3)
        path = str(tmp_path / "f.dgfw")
        FgdmCheckpoint(AENet(SMALL), spec).save(path)
        assert FgdmCheckpoint.load(path).dtlr == spec

    def test_not_an_fgdm_checkpoint(self, tmp_path):
        path = str(tmp_path / "other.dgfw")
        save_checkpoint(path, {"rfdm.meta.steps": np.array([1.0])})
        with pytest.raises(CheckpointError):
            FgdmCheckpoint.load(path)

    def test_missing_parameter(self, tmp_path, trained):
        path = str(tmp_path / "fgdm.dgfw")
        trained[0].save(path)
        tensors = load_checkpoint(path)
        del tensors["fgdm.tail.bias"]
        save_checkpoint(path, tensors)
        with pytest.raises(CheckpointError):
            FgdmCheckpoint.load(path)

    def test_malformed_architecture(self, tmp_path, trained):
        path = str(tmp_path / "fgdm.dgfw")
        trained[0].save(path)
        tensors = load_checkpoint(path)
        tensors["fgdm.meta.arch"] = tensors["fgdm.meta.arch"][:2]
        save_checkpoint(path, tensors)
        with pytest.raises(CheckpointError, match="malformed"):
            FgdmCheckpoint.load(path)

import numpy as np
import pytest

from degflow import fourier
from degflow.autodiff.tensor import Tensor
from degflow.exceptions import NumericalError, ShapeError
from degflow.imaging import corpus
from tests import fixtures, utils

SIZES = [(4, 4), (5, 7), (8, 6), (16, 16)]


class TestTransforms:
    @pytest.mark.parametrize("h,w", SIZES)
    def test_round_trip(self, h, w):
        img = np.random.default_rng(0).uniform(size=(h, w, 3))
        out = fourier.ifft2(fourier.fft2(img))
        assert np.max(np.abs(out - img)) <= 1e-5

    @pytest.mark.parametrize("h,w", SIZES)
    def test_parseval(self, h, w):
        img = np.random.default_rng(1).uniform(size=(h, w, 1))
        energy = np.sum(np.abs(fourier.fft2(img).values) ** 2) / (h * w)
        assert energy == pytest.approx(np.sum(img**2), rel=1e-4)

    @pytest.mark.parametrize("h,w", SIZES)
    def test_matches_naive_dft(self, h, w):
        img = np.random.default_rng(2).uniform(size=(h, w, 1))
        spectrum = fourier.fft2(img).values[:, :, 0]
        np.testing.assert_allclose(spectrum, utils.naive_dft2(img[:, :, 0]), atol=1e-6)

    def test_constant_image_has_only_dc(self):
        spectrum = fourier.fft2(np.full((6, 5, 1), 0.3)).values[:, :, 0]
        assert spectrum[0, 0] == pytest.approx(0.3 * 6 * 5, abs=1e-6)
        spectrum[0, 0] = 0.0
        assert np.max(np.abs(spectrum)) <= 1e-6

    def test_delta_has_flat_amplitude(self):
        img = np.zeros((8, 8, 1))
        img[0, 0] = 1.0
        parts = fourier.amp_phase(fourier.fft2(img))
        np.testing.assert_allclose(parts.amplitude, 1.0, atol=1e-12)

    def test_negative_imaginary_bin(self):
        values = np.zeros((4, 4, 1), dtype=np.complex128)
        values[0, 0, 0] = -3j
        parts = fourier.amp_phase(fourier.Spectrum(values))
        assert parts.amplitude[0, 0, 0] == pytest.approx(3.0)
        assert parts.phase[0, 0, 0] == pytest.approx(-np.pi / 2)

    @pytest.mark.parametrize("h,w", SIZES)
    def test_real_image_is_conjugate_symmetric(self, h, w):
        img = np.random.default_rng(3).uniform(size=(h, w, 2))
        values = fourier.fft2(img).values
        reflected = np.conj(fourier.point_reflect(values))
        assert np.max(np.abs(values - reflected)) <= 1e-6

    def test_hermitian_part_keeps_the_real_inverse(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(6, 7, 2)) + 1j * rng.normal(size=(6, 7, 2))
        spec = fourier.Spectrum(values)
        with pytest.raises(NumericalError):
            fourier.ifft2(spec)
        out = fourier.ifft2(fourier.hermitian_part(spec))
        expected = np.fft.ifft2(values, axes=(0, 1)).real
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_gray_plane_is_promoted(self):
        spectrum = fourier.fft2(np.ones((4, 4)))
        assert spectrum.channels == 1
        assert spectrum.values[0, 0, 0] == pytest.approx(16.0)

    def test_too_small(self):
        with pytest.raises(ShapeError):
            fourier.fft2(np.ones((1, 4, 1)))

    def test_asymmetric_spectrum(self):
        values = np.zeros((4, 4, 1), dtype=np.complex128)
        values[1, 0, 0] = 16.0
        with pytest.raises(NumericalError):
            fourier.ifft2(fourier.Spectrum(values))


class TestAmplitudePhase:
    def test_decomposition(self):
        img = fixtures.noisy_image(3, 8, 8)
        parts = fourier.amp_phase(fourier.fft2(img))
        assert np.all(parts.amplitude >= 0)
        assert np.all(parts.phase > -np.pi) and np.all(parts.phase <= np.pi)
        out = fourier.ifft2(fourier.recombine(parts.amplitude, parts.phase))
        np.testing.assert_allclose(out, img, atol=1e-10)

    def test_zero_bins_have_zero_phase(self):
        values = np.zeros((4, 4, 1), dtype=np.complex128)
        values[0, 0, 0] = -8.0
        values[1, 1, 0] = -0.0 - 0.0j
        parts = fourier.amp_phase(fourier.Spectrum(values))
        assert parts.phase[0, 0, 0] == np.pi
        assert not np.any(parts.phase[1:])

    def test_recombine_checks(self):
        with pytest.raises(ShapeError):
            fourier.recombine(np.ones((4, 4, 1)), np.ones((4, 3, 1)))
        with pytest.raises(ValueError):
            fourier.recombine(-np.ones((4, 4, 1)), np.ones((4, 4, 1)))

    def test_swap_with_itself(self):
        img = fixtures.noisy_image(4, 8, 10)
        np.testing.assert_allclose(fourier.swap_amplitude(img, img), img, atol=1e-10)

    def test_swap_keeps_phase_structure(self):
        a = fixtures.smooth_image(1, 16, 16)
        b = fixtures.noisy_image(2, 16, 16)
        out = fourier.swap_amplitude(a, b)
        assert out.shape == a.shape
        assert out.min() >= 0.0 and out.max() <= 1.0
        with pytest.raises(ShapeError):
            fourier.swap_amplitude(a, b[:8])

    def test_swap_conserves_amplitudes(self):
        a = fixtures.noisy_image(5, 12, 12)
        b = fixtures.noisy_image(6, 12, 12)
        amp_a = fourier.amp_phase(fourier.fft2(a)).amplitude
        amp_b = fourier.amp_phase(fourier.fft2(b)).amplitude
        ab = fourier.swap_amplitude(a, b, clamp=False)
        ba = fourier.swap_amplitude(b, a, clamp=False)
        amp_ab = fourier.amp_phase(fourier.fft2(ab)).amplitude
        amp_ba = fourier.amp_phase(fourier.fft2(ba)).amplitude
        before = np.sort(np.stack([amp_a, amp_b]), axis=0)
        after = np.sort(np.stack([amp_ab, amp_ba]), axis=0)
        np.testing.assert_allclose(after, before, atol=1e-8)

    def test_swap_constant_amplitude(self):
        flat = np.full((8, 8, 3), 0.4)
        out = fourier.swap_amplitude(flat, fixtures.noisy_image(7, 8, 8))
        np.testing.assert_allclose(out, 0.4, atol=1e-9)

    def test_swap_stripes(self):
        x = np.arange(32)
        stripes = 0.5 + 0.4 * np.sin(2 * np.pi * x / 8)
        img = np.broadcast_to(stripes[None, :, None], (32, 32, 3)).copy()
        out = fourier.swap_amplitude(fixtures.noisy_image(8, 32, 32), img)
        assert np.all(np.isfinite(out))
        assert out.shape == img.shape

    def test_symmetrized_amplitude_is_point_symmetric(self):
        amp = np.random.default_rng(5).uniform(size=(6, 5, 2))
        sym = fourier.symmetrize_amplitude(amp)
        np.testing.assert_allclose(sym, fourier.point_reflect(sym))

    def test_real_image_amplitude_is_already_symmetric(self):
        amp = fourier.amp_phase(fourier.fft2(fixtures.noisy_image(6, 6, 8))).amplitude
        np.testing.assert_allclose(fourier.symmetrize_amplitude(amp), amp, atol=1e-12)

    def test_point_reflect(self):
        a = np.arange(9.0).reshape(3, 3)
        out = fourier.point_reflect(a)
        assert out[0, 0] == a[0, 0]
        assert out[1, 2] == a[2, 1]
        assert out[0, 1] == a[0, 2]

    def test_amplitude_image(self):
        view = fourier.amplitude_image(fixtures.noisy_image(7, 8, 8))
        assert view.shape == (8, 8, 3)
        assert view.min() >= 0.0
        np.testing.assert_allclose(view.max(axis=(0, 1)), 1.0)
        # DC lands in the center after the shift
        assert np.all(view[4, 4] == 1.0)


class TestSynthesize:
    def test_matches_inverse_transform(self):
        img = fixtures.noisy_image(8, 8, 8)
        parts = fourier.amp_phase(fourier.fft2(img))
        hwc_to_nchw = (2, 0, 1)
        amp = np.transpose(parts.amplitude, hwc_to_nchw)[None]
        phase = np.transpose(parts.phase, hwc_to_nchw)[None]
        out = fourier.synthesize(Tensor(amp), phase).data[0]
        np.testing.assert_allclose(np.transpose(out, (1, 2, 0)), img, atol=1e-10)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            fourier.synthesize(Tensor(np.ones((1, 1, 4, 4))), np.ones((1, 1, 4, 3)))


def test_swap_study_rows():
    first = [fixtures.smooth_image(i) for i in range(2)]
    second = [fixtures.noisy_image(i) for i in range(2)]
    rows = fourier.amplitude_swap_study(["a", "b"], first, second)
    assert [r.name for r in rows] == [
        "a:amp_first",
        "a:amp_second",
        "b:amp_first",
        "b:amp_second",
    ]
    for row in rows:
        assert -1.0 <= row.edge_ssim_amp_source <= 1.0
        assert -1.0 <= row.edge_ssim_phase_source <= 1.0


def test_swap_result_follows_the_phase_source():
    first = [corpus.texture(seed, 32) for seed in range(3)]
    second = [corpus.texture(seed, 32) for seed in range(10, 13)]
    rows = fourier.amplitude_swap_study(["a", "b", "c"], first, second)
    margins = [r.edge_ssim_phase_source - r.edge_ssim_amp_source for r in rows]
    assert np.mean(margins) > 0.0

"""
2D Fourier analysis of images.

Transforms run per channel over the full image size (no padding): forward is
unnormalized, inverse carries the ``1 / (H * W)`` factor. Phase is the
principal value in (-pi, pi]; bins with zero amplitude get phase 0.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from degflow import metrics
from degflow.autodiff.tensor import Tensor
from degflow.exceptions import NumericalError, ShapeError

IMAG_TOLERANCE = 1e-5


@dataclass
class Spectrum:
    """Complex frequency plane of shape (H, W, C)."""

    values: np.ndarray

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return self.values.shape[2]


@dataclass
class AmpPhase:
    amplitude: np.ndarray
    phase: np.ndarray


def fft2(img: np.ndarray) -> Spectrum:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise ShapeError(f"fft2 needs at least 2x2, got {img.shape}")
    return Spectrum(np.fft.fft2(img, axes=(0, 1)))


def ifft2(spec: Spectrum) -> np.ndarray:
    """Inverse transform to a real image, not clamped.

    Raises:
        NumericalError: The spectrum is not conjugate-symmetric, i.e. the
            imaginary residue exceeds ``IMAG_TOLERANCE`` relative to the image.
    """
    out = np.fft.ifft2(spec.values, axes=(0, 1))
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if residue > IMAG_TOLERANCE * scale:
        raise NumericalError(
            f"spectrum is not conjugate-symmetric (imaginary residue {residue:.3g})"
        )
    return np.ascontiguousarray(out.real)


def amp_phase(spec: Spectrum) -> AmpPhase:
    amplitude = np.abs(spec.values)
    phase = np.angle(spec.values)
    phase = np.where(phase <= -np.pi, np.pi, phase)
    phase = np.where(amplitude == 0, 0.0, phase)
    return AmpPhase(amplitude=amplitude, phase=phase)


def recombine(amplitude: np.ndarray, phase: np.ndarray) -> Spectrum:
    if amplitude.shape != phase.shape:
        raise ShapeError(f"amplitude {amplitude.shape} vs phase {phase.shape}")
    if np.any(amplitude < 0):
        raise ValueError("amplitude must be nonnegative")
    return Spectrum(amplitude * np.exp(1j * phase))


def point_reflect(a: np.ndarray, axes=(0, 1)) -> np.ndarray:
    """``a[(-u) mod H, (-v) mod W]`` over ``axes``."""
    return np.roll(np.flip(a, axis=axes), 1, axis=axes)


def symmetrize_amplitude(amplitude: np.ndarray, axes=(0, 1)) -> np.ndarray:
    """Averages every bin with its point-reflected bin."""
    return 0.5 * (amplitude + point_reflect(amplitude, axes))


def hermitian_part(spec: Spectrum) -> Spectrum:
    """Projection onto conjugate-symmetric spectra.

    ``ifft2(hermitian_part(s))`` equals the real part of the inverse transform
    of ``s``. Applied wherever an amplitude is recombined with the phase of a
    different spectrum, whose phase is not antisymmetric at near-zero bins.
    """
    values = spec.values
    return Spectrum(0.5 * (values + np.conj(point_reflect(values))))


def swap_amplitude(x: np.ndarray, y: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Image with the amplitude of ``x`` and the phase of ``y``, clamped to
    [0, 1] unless ``clamp`` is false."""
    if np.shape(x) != np.shape(y):
        raise ShapeError(f"image shapes differ: {np.shape(x)} vs {np.shape(y)}")
    amp = amp_phase(fft2(x)).amplitude
    phase = amp_phase(fft2(y)).phase
    out = ifft2(hermitian_part(recombine(amp, phase)))
    return np.clip(out, 0.0, 1.0) if clamp else out


def amplitude_image(img: np.ndarray) -> np.ndarray:
    """``log(1 + A)`` per channel, DC centered, scaled to [0, 1] for viewing."""
    amp = amp_phase(fft2(img)).amplitude
    view = np.fft.fftshift(np.log1p(amp), axes=(0, 1))
    peak = view.max(axis=(0, 1), keepdims=True)
    return view / np.where(peak > 0, peak, 1.0)


# differentiable pieces used by FGDM training, NCHW layout


def symmetrize(amplitude: Tensor) -> Tensor:
    """Tensor version of :func:`symmetrize_amplitude` over the last two axes."""
    axes = (-2, -1)
    out = symmetrize_amplitude(amplitude.data, axes)

    def backward(g):
        return (symmetrize_amplitude(g, axes),)

    return Tensor.from_op(out, (amplitude,), backward, "symmetrize")


def synthesize(amplitude: Tensor, phase: np.ndarray) -> Tensor:
    """``Re(ifft2(A * exp(i * phase)))`` over the last two axes.

    The map is linear in ``A``; its adjoint is
    ``Re(exp(-i * phase) * fft2(g)) / (H * W)``.
    """
    if amplitude.shape != phase.shape:
        raise ShapeError(f"amplitude {amplitude.shape} vs phase {phase.shape}")
    rotor = np.exp(1j * phase)
    h, w = phase.shape[-2:]
    out = np.fft.ifft2(amplitude.data * rotor, axes=(-2, -1)).real
    dtype = amplitude.dtype

    def backward(g):
        grad = (np.conj(rotor) * np.fft.fft2(g, axes=(-2, -1))).real / (h * w)
        return (grad.astype(dtype),)

    return Tensor.from_op(out.astype(dtype), (amplitude,), backward, "synthesize")


@dataclass
class SwapRow:
    name: str
    edge_ssim_amp_source: float
    edge_ssim_phase_source: float


def amplitude_swap_study(
    names: Sequence[str],
    first_set: Sequence[np.ndarray],
    second_set: Sequence[np.ndarray],
) -> list[SwapRow]:
    """Swaps amplitude both ways for every pair and scores the edge map of the
    result against the amplitude source and against the phase source."""
    rows = []
    for name, a, b in zip(names, first_set, second_set):
        for label, amp_src, phase_src in (("amp_first", a, b), ("amp_second", b, a)):
            edges = metrics.edge_map(swap_amplitude(amp_src, phase_src))
            rows.append(
                SwapRow(
                    name=f"{name}:{label}",
                    edge_ssim_amp_source=metrics.ssim(
                        edges, metrics.edge_map(amp_src)
                    ),
                    edge_ssim_phase_source=metrics.ssim(
                        edges, metrics.edge_map(phase_src)
                    ),
                )
            )
    return rows

"""
Fidelity metrics on [0, 1] images (peak 1.0), computed on all channels with no
luma conversion and no border crop.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from degflow.exceptions import ShapeError

PSNR_CAP = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01**2
SSIM_C2 = 0.03**2


@dataclass
class MetricReport:
    psnr: float
    ssim: float


def _pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    return a, b


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """``10 * log10(1 / MSE)``; identical images score ``PSNR_CAP``."""
    a, b = _pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(1.0 / mse))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid-region SSIM map of two single-channel planes."""
    window = gaussian_window()

    def filt(x):
        return signal.correlate2d(x, window, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return num / den


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity, averaged over channels.

    Raises:
        ShapeError: Shapes differ or the image is smaller than the window.
    """
    a, b = _pair(a, b)
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise ShapeError(
            f"image {a.shape[0]}x{a.shape[1]} is smaller than the "
            f"{SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    scores = [ssim_map(a[:, :, c], b[:, :, c]).mean() for c in range(a.shape[2])]
    return float(np.mean(scores))


def evaluate_pair(a: np.ndarray, b: np.ndarray) -> MetricReport:
    return MetricReport(psnr=psnr(a, b), ssim=ssim(a, b))


def edge_map(img: np.ndarray) -> np.ndarray:
    """Per-channel Sobel gradient magnitude."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        gy = ndimage.sobel(img[:, :, c], axis=0, mode="nearest")
        gx = ndimage.sobel(img[:, :, c], axis=1, mode="nearest")
        out[:, :, c] = np.hypot(gx, gy)
    return out

"""
Separable image resampling and the repeated down-up (DT-LR) transform.

Geometry: half-pixel centers, so destination pixel ``i`` samples source
coordinate ``(i + 0.5) * in / out - 0.5``; taps outside the image are clamped
to the edge pixel. When shrinking, the kernel is stretched by the size ratio so
every filter averages over the area it replaces. Each row of weights is
normalized to sum to one, which keeps constant images constant.
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from degflow import metrics
from degflow.enums import FilterKind
from degflow.exceptions import ShapeError
from degflow.models import DtlrSpec

logger = logging.getLogger(__name__)

BICUBIC_A = -0.5
LANCZOS_LOBES = 3


def _triangle(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x))


def _keys_cubic(x: np.ndarray) -> np.ndarray:
    a = BICUBIC_A
    x = np.abs(x)
    near = ((a + 2) * x - (a + 3)) * x * x + 1
    far = ((a * x - 5 * a) * x + 8 * a) * x - 4 * a
    return np.where(x <= 1, near, np.where(x < 2, far, 0.0))


def _lanczos(x: np.ndarray) -> np.ndarray:
    return np.where(
        np.abs(x) < LANCZOS_LOBES, np.sinc(x) * np.sinc(x / LANCZOS_LOBES), 0.0
    )


KERNELS: dict[FilterKind, tuple[Callable[[np.ndarray], np.ndarray], float]] = {
    FilterKind.BILINEAR: (_triangle, 1.0),
    FilterKind.BICUBIC: (_keys_cubic, 2.0),
    FilterKind.LANCZOS3: (_lanczos, float(LANCZOS_LOBES)),
}


def kernel(filter: FilterKind) -> tuple[Callable[[np.ndarray], np.ndarray], float]:
    """The kernel function of ``filter`` and its support radius."""
    return KERNELS[FilterKind(filter)]


@functools.lru_cache(maxsize=64)
def resize_weights(in_size: int, out_size: int, filter: FilterKind) -> np.ndarray:
    """The (out_size, in_size) matrix the resampler applies along one axis.

    Cached; the returned array is read-only.
    """
    if in_size < 1 or out_size < 1:
        raise ValueError(f"sizes must be >= 1, got {in_size} -> {out_size}")
    fn, support = kernel(filter)
    scale = in_size / out_size
    stretch = max(scale, 1.0)
    radius = support * stretch
    centers = (np.arange(out_size) + 0.5) * scale - 0.5
    first = np.floor(centers - radius).astype(np.int64)
    taps = int(math.ceil(2 * radius)) + 2
    positions = first[:, None] + np.arange(taps)[None, :]
    values = fn((positions - centers[:, None]) / stretch)
    indices = np.clip(positions, 0, in_size - 1)
    weights = np.zeros((out_size, in_size))
    rows = np.repeat(np.arange(out_size), taps)
    np.add.at(weights, (rows, indices.reshape(-1)), values.reshape(-1))
    weights /= weights.sum(axis=1, keepdims=True)
    weights.setflags(write=False)
    return weights


def resize(
    img: np.ndarray, out_h: int, out_w: int, filter: FilterKind = FilterKind.BILINEAR
) -> np.ndarray:
    """Resamples an (H, W, C) image to (out_h, out_w, C). Output is not clamped."""
    if out_h < 1 or out_w < 1:
        raise ValueError(f"target size must be >= 1, got {out_h}x{out_w}")
    h, w = img.shape[:2]
    rows = resize_weights(h, out_h, filter)
    cols = resize_weights(w, out_w, filter)
    out = np.einsum("ih,hwc->iwc", rows, img)
    return np.einsum("jw,iwc->ijc", cols, out)


def _check_divisible(img: np.ndarray, scale: int) -> None:
    h, w = img.shape[:2]
    if h % scale or w % scale:
        raise ShapeError(f"image {h}x{w} is not divisible by scale {scale}")


def down_up(img: np.ndarray, scale: int, filter: FilterKind) -> np.ndarray:
    """One down-up cycle."""
    h, w = img.shape[:2]
    small = resize(img, h // scale, w // scale, filter)
    return resize(small, h, w, filter)


def dtlr(img: np.ndarray, spec: DtlrSpec | None = None) -> np.ndarray:
    """Applies ``spec.iterations`` down-up cycles; zero iterations is a copy."""
    spec = spec or DtlrSpec()
    _check_divisible(img, spec.scale)
    out = np.array(img, copy=True)
    for _ in range(spec.iterations):
        out = down_up(out, spec.scale, spec.filter)
    return out


@dataclass
class ConvergenceRow:
    iters: int
    psnr: float
    ssim: float


@dataclass
class FilterRow:
    filter: FilterKind
    iters: int
    psnr: float
    ssim: float


def degradation_convergence_study(
    lr_real_set: Sequence[np.ndarray],
    lr_bi_set: Sequence[np.ndarray],
    max_iters: int,
    filter: FilterKind = FilterKind.BILINEAR,
    scale: int = 4,
) -> list[ConvergenceRow]:
    """Mean PSNR / SSIM between DT-LR versions of aligned real and bilinear LR
    sets, for 0..max_iters down-up cycles."""
    if len(lr_real_set) != len(lr_bi_set):
        raise ShapeError("real and bilinear sets differ in length")
    for real, bi in zip(lr_real_set, lr_bi_set):
        if real.shape != bi.shape:
            raise ShapeError(f"misaligned pair: {real.shape} vs {bi.shape}")
        _check_divisible(real, scale)
    real_cur = [np.asarray(x, dtype=np.float64) for x in lr_real_set]
    bi_cur = [np.asarray(x, dtype=np.float64) for x in lr_bi_set]
    filter = FilterKind(filter)
    table = []
    for i in range(max_iters + 1):
        if i > 0:
            real_cur = [down_up(x, scale, filter) for x in real_cur]
            bi_cur = [down_up(x, scale, filter) for x in bi_cur]
        psnr = float(np.mean([metrics.psnr(a, b) for a, b in zip(real_cur, bi_cur)]))
        ssim = float(np.mean([metrics.ssim(a, b) for a, b in zip(real_cur, bi_cur)]))
        logger.debug("%s iters=%d psnr=%.4f ssim=%.4f", filter.value, i, psnr, ssim)
        table.append(ConvergenceRow(iters=i, psnr=psnr, ssim=ssim))
    return table


def filter_study(
    hr_set: Sequence[np.ndarray],
    lr_real_set: Sequence[np.ndarray],
    max_iters: int,
    filters: Sequence[FilterKind] = tuple(FilterKind),
    scale: int = 4,
) -> list[FilterRow]:
    """For each filter: generate LR from HR with it, then run the convergence
    study against the aligned real LR using the same filter for the cycles."""
    table = []
    for f in filters:
        f = FilterKind(f)
        generated = []
        for hr in hr_set:
            lr = resize(hr, hr.shape[0] // scale, hr.shape[1] // scale, f)
            generated.append(np.clip(lr, 0.0, 1.0))
        rows = degradation_convergence_study(
            lr_real_set, generated, max_iters, f, scale
        )
        table.extend(FilterRow(f, r.iters, r.psnr, r.ssim) for r in rows)
    return table

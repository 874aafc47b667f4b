import glob
import os

import numpy as np

from degflow.autodiff.random import rng
from degflow.enums import Stream
from degflow.exceptions import ShapeError

MIN_PIPELINE_SIZE = 8


def check_image(img: np.ndarray, min_size: int = 1) -> None:
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ShapeError(f"expected an (H, W, 1|3) image, got shape {img.shape}")
    if img.shape[0] < min_size or img.shape[1] < min_size:
        raise ShapeError(
            f"image {img.shape[0]}x{img.shape[1]} is smaller than {min_size}x{min_size}"
        )


def center_crop(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Window starting at ``((H - out_h) // 2, (W - out_w) // 2)``."""
    h, w = img.shape[:2]
    if out_h > h or out_w > w or out_h < 1 or out_w < 1:
        raise ShapeError(f"cannot crop {out_h}x{out_w} from {h}x{w}")
    top = (h - out_h) // 2
    left = (w - out_w) // 2
    return img[top : top + out_h, left : left + out_w].copy()


def random_patch(img: np.ndarray, size: int, seed: int) -> np.ndarray:
    """Square patch with a uniformly drawn top-left corner.

    The corner comes from the ``PATCH`` stream of ``seed``, so the same image
    and seed always give the same patch.
    """
    h, w = img.shape[:2]
    if size > h or size > w or size < 1:
        raise ShapeError(f"cannot take a {size}x{size} patch from {h}x{w}")
    g = rng(seed, Stream.PATCH)
    top = int(g.integers(0, h - size + 1))
    left = int(g.integers(0, w - size + 1))
    return img[top : top + size, left : left + size].copy()


def clamp(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def to_nchw(images, dtype=np.float32) -> np.ndarray:
    """Stacks (H, W, C) images into an (N, C, H, W) batch."""
    if isinstance(images, np.ndarray) and images.ndim == 3:
        images = [images]
    return np.stack([np.transpose(im, (2, 0, 1)) for im in images]).astype(dtype)


def from_nchw(batch: np.ndarray) -> list[np.ndarray]:
    return [np.transpose(b, (1, 2, 0)).astype(np.float64) for b in batch]


def list_images(directory: str) -> list[str]:
    """PNG files in ``directory``, sorted lexicographically."""
    return sorted(glob.glob(os.path.join(directory, "*.png")))

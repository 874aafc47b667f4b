"""
Corpus layout and the procedural desk corpus.

A training corpus is two unrelated directories, one of HR images and one of
real LR images. The desk corpus generator writes such a pair of directories
plus a held-out set of aligned triplets whose "real" degradation is known::

    <root>/hr/                 HR textures (training, unpaired)
    <root>/lr/                 real LR from a disjoint texture set
    <root>/heldout/hr/         held-out HR
    <root>/heldout/lr_real/    real degradation of heldout/hr
    <root>/heldout/lr_bi/      plain bilinear downscale of heldout/hr
    <root>/degradations.csv    name,split,blur_sigma,noise_sigma
"""

import csv
import logging
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from degflow.autodiff.random import derive_seed, rng
from degflow.enums import FilterKind, Stream
from degflow.exceptions import CorpusEmptyError, ShapeError
from degflow.imaging.io import load_image, save_image, to_bytes
from degflow.imaging.ops import list_images
from degflow.resample import resize

logger = logging.getLogger(__name__)

SCALE = 4
BLUR_SIGMA_RANGE = (1.0, 2.5)
NOISE_SIGMA_RANGE = (0.01, 0.04)

# split indices keep the texture sets of the three splits disjoint
SPLIT_HR = 0
SPLIT_LR = 1
SPLIT_HELDOUT = 2


@dataclass
class CorpusLayout:
    hr_dir: str
    lr_dir: str
    hr_files: list[str] = field(default_factory=list)
    lr_files: list[str] = field(default_factory=list)

    @classmethod
    def discover(cls, hr_dir: str, lr_dir: str, require_hr: bool = True):
        """Lists both directories. No correspondence between names is assumed.

        Raises:
            CorpusEmptyError: A required directory is missing or has no PNGs.
        """
        lr_files = list_images(lr_dir)
        if not lr_files:
            raise CorpusEmptyError(f"no PNG images in LR directory {lr_dir}")
        hr_files = list_images(hr_dir)
        if require_hr and not hr_files:
            raise CorpusEmptyError(f"no PNG images in HR directory {hr_dir}")
        return cls(hr_dir, lr_dir, hr_files, lr_files)

    def load_lr(self) -> list[np.ndarray]:
        return [load_image(p) for p in self.lr_files]

    def load_hr(self) -> list[np.ndarray]:
        return [load_image(p) for p in self.hr_files]


@dataclass
class HeldoutSet:
    """Aligned ``(hr, lr_real, lr_bi)`` triplets matched by file name."""

    names: list[str]
    hr: list[np.ndarray]
    lr_real: list[np.ndarray]
    lr_bi: list[np.ndarray]

    @classmethod
    def load(cls, root: str) -> "HeldoutSet":
        names = [os.path.basename(p) for p in list_images(os.path.join(root, "hr"))]
        if not names:
            raise CorpusEmptyError(f"no held-out images under {root}")
        sets = {}
        for sub in ("hr", "lr_real", "lr_bi"):
            sets[sub] = [load_image(os.path.join(root, sub, n)) for n in names]
        for name, real, bi in zip(names, sets["lr_real"], sets["lr_bi"]):
            if real.shape != bi.shape:
                raise ShapeError(f"held-out {name}: {real.shape} vs {bi.shape}")
        return cls(names, sets["hr"], sets["lr_real"], sets["lr_bi"])


@dataclass
class Degradation:
    blur_sigma: float
    noise_sigma: float


def _grating(g: np.random.Generator, size: int) -> np.ndarray:
    y, x = np.mgrid[0:size, 0:size] / size
    freq = g.uniform(2.0, 12.0)
    angle = g.uniform(0.0, np.pi)
    wave = np.sin(2 * np.pi * freq * (x * np.cos(angle) + y * np.sin(angle)))
    return (0.5 + 0.5 * wave)[:, :, None] * g.uniform(0.3, 1.0, size=3)


def _checker(g: np.random.Generator, size: int) -> np.ndarray:
    cell = int(g.choice([4, 8, 16]))
    y, x = np.mgrid[0:size, 0:size]
    mask = ((x // cell + y // cell) % 2).astype(np.float64)[:, :, None]
    a, b = g.uniform(0.0, 1.0, size=(2, 3))
    return mask * a + (1 - mask) * b


def _smooth_field(g: np.random.Generator, size: int) -> np.ndarray:
    noise = g.standard_normal((size, size, 3))
    smooth = ndimage.gaussian_filter(noise, sigma=(size / 8, size / 8, 0), mode="wrap")
    low, high = smooth.min(), smooth.max()
    if high <= low:
        return np.full_like(smooth, 0.5)
    return (smooth - low) / (high - low)


def _discs(g: np.random.Generator, size: int) -> np.ndarray:
    img = np.tile(g.uniform(0.0, 1.0, size=3), (size, size, 1))
    y, x = np.mgrid[0:size, 0:size]
    for _ in range(int(g.integers(3, 8))):
        cy, cx = g.uniform(0, size, size=2)
        radius = g.uniform(size / 16, size / 4)
        inside = (y - cy) ** 2 + (x - cx) ** 2 <= radius**2
        img[inside] = g.uniform(0.0, 1.0, size=3)
    return img


LAYERS = (_grating, _checker, _discs)


def texture(seed: int, size: int) -> np.ndarray:
    """A procedural RGB texture: a smooth colour field with two or three
    gratings, checkers or disc layers blended over it."""
    g = rng(seed, Stream.CORPUS)
    img = _smooth_field(g, size)
    for _ in range(int(g.integers(2, 4))):
        layer = LAYERS[int(g.integers(0, len(LAYERS)))](g, size)
        alpha = g.uniform(0.3, 0.7)
        img = (1 - alpha) * img + alpha * layer
    return np.clip(img, 0.0, 1.0)


def degrade(hr: np.ndarray, degradation: Degradation, seed: int) -> np.ndarray:
    """Known "real" degradation: blur at HR scale, bilinear x4 downscale,
    Gaussian noise at LR scale, clamp."""
    s = degradation.blur_sigma
    blurred = ndimage.gaussian_filter(hr, sigma=(s, s, 0), mode="reflect")
    h, w = hr.shape[:2]
    lr = resize(blurred, h // SCALE, w // SCALE, FilterKind.BILINEAR)
    noise = rng(seed, Stream.NOISE).standard_normal(lr.shape)
    return np.clip(lr + degradation.noise_sigma * noise, 0.0, 1.0)


def bilinear_lr(hr: np.ndarray) -> np.ndarray:
    h, w = hr.shape[:2]
    return np.clip(resize(hr, h // SCALE, w // SCALE, FilterKind.BILINEAR), 0.0, 1.0)


def _draw_degradation(seed: int) -> Degradation:
    g = rng(seed, Stream.SAMPLE)
    return Degradation(
        blur_sigma=float(g.uniform(*BLUR_SIGMA_RANGE)),
        noise_sigma=float(g.uniform(*NOISE_SIGMA_RANGE)),
    )


def generate_desk_corpus(
    root: str,
    seed: int = 0,
    train_images: int = 24,
    hr_images: int = 24,
    heldout_images: int = 8,
    hr_size: int = 128,
) -> CorpusLayout:
    """Writes the desk corpus under ``root`` and returns its training layout.

    Raises:
        ShapeError: ``hr_size`` is not a multiple of 4 or leaves LR images
            smaller than 8 pixels.
    """
    if hr_size % SCALE or hr_size // SCALE < 8:
        raise ShapeError(f"hr_size must be a multiple of {SCALE} and >= 32")
    os.makedirs(root, exist_ok=True)
    rows = []

    def make(split: int, index: int):
        item_seed = derive_seed(seed, split, index)
        # quantize first so the saved HR is exactly what the LR was made from
        hr = to_bytes(texture(item_seed, hr_size)) / 255.0
        degradation = _draw_degradation(item_seed)
        return f"{index:04d}.png", hr, degradation, item_seed

    for i in range(hr_images):
        name, hr, _, _ = make(SPLIT_HR, i)
        save_image(hr, os.path.join(root, "hr", name))
    for i in range(train_images):
        name, hr, degradation, item_seed = make(SPLIT_LR, i)
        save_image(degrade(hr, degradation, item_seed), os.path.join(root, "lr", name))
        rows.append([name, "lr", degradation])
    for i in range(heldout_images):
        name, hr, degradation, item_seed = make(SPLIT_HELDOUT, i)
        heldout = os.path.join(root, "heldout")
        save_image(hr, os.path.join(heldout, "hr", name))
        real = degrade(hr, degradation, item_seed)
        save_image(real, os.path.join(heldout, "lr_real", name))
        save_image(bilinear_lr(hr), os.path.join(heldout, "lr_bi", name))
        rows.append([name, "heldout", degradation])

    with open(os.path.join(root, "degradations.csv"), "w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["name", "split", "blur_sigma", "noise_sigma"])
        for name, split, d in rows:
            blur, noise = f"{d.blur_sigma:.4f}", f"{d.noise_sigma:.4f}"
            writer.writerow([name, split, blur, noise])
    logger.info(
        "desk corpus at %s: %d HR, %d real LR, %d held-out triplets",
        root,
        hr_images,
        train_images,
        heldout_images,
    )
    hr_dir, lr_dir = os.path.join(root, "hr"), os.path.join(root, "lr")
    # either training split may be empty when only held-out triplets are wanted
    return CorpusLayout(hr_dir, lr_dir, list_images(hr_dir), list_images(lr_dir))

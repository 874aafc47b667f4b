import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from degflow.exceptions import (
    CorruptImageError,
    DataError,
    ImageNotFoundError,
    UnsupportedImageError,
)

SUPPORTED_MODES = {"L": 1, "RGB": 3}


def load_image(path: str) -> np.ndarray:
    """Loads an 8-bit gray or RGB PNG as an (H, W, C) float64 image in [0, 1].

    Byte values map to ``v / 255`` exactly.

    Raises:
        ImageNotFoundError: ``path`` does not exist.
        UnsupportedImageError: The image is not 8-bit gray or 8-bit RGB.
        CorruptImageError: The stream cannot be decoded.
    """
    if not os.path.isfile(path):
        raise ImageNotFoundError(f"No image at {path}")
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode not in SUPPORTED_MODES:
                raise UnsupportedImageError(
                    f"{path} has mode {mode!r}; only 8-bit gray and RGB are supported"
                )
            pixels = np.asarray(im.convert(mode), dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise CorruptImageError(f"Cannot decode {path}: {e}") from e
    except (OSError, SyntaxError, ValueError) as e:
        raise CorruptImageError(f"Cannot decode {path}: {e}") from e
    if pixels.ndim == 2:
        pixels = pixels[:, :, None]
    return pixels.astype(np.float64) / 255.0


def to_bytes(img: np.ndarray) -> np.ndarray:
    """``round(v * 255)`` with ties away from zero, as uint8."""
    scaled = np.asarray(img, dtype=np.float64) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def save_image(img: np.ndarray, path: str) -> None:
    """Saves an (H, W, C) image in [0, 1] as a PNG. Callers clamp first."""
    pixels = to_bytes(img)
    if pixels.ndim == 3 and pixels.shape[2] == 1:
        pixels = pixels[:, :, 0]
    directory = os.path.dirname(path)
    try:
        if directory:
            os.makedirs(directory, exist_ok=True)
        Image.fromarray(pixels).save(path, format="PNG")
    except (IOError, OSError) as e:
        raise DataError(f"Failed to write image at {path}: {e}") from e

"""
Imaging - image files, array helpers and corpus directories.

Images are ``numpy`` arrays of shape (H, W, C), float64 in [0, 1], C in {1, 3}.
"""

from .corpus import CorpusLayout, HeldoutSet, generate_desk_corpus
from .io import load_image, save_image
from .ops import center_crop, clamp, from_nchw, list_images, random_patch, to_nchw

__all__ = [
    "CorpusLayout",
    "HeldoutSet",
    "center_crop",
    "clamp",
    "from_nchw",
    "generate_desk_corpus",
    "list_images",
    "load_image",
    "random_patch",
    "save_image",
    "to_nchw",
]

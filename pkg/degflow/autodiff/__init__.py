"""
Autodiff - a small deterministic tensor library.

Reverse-mode differentiation over numpy arrays, the layers the degradation
networks are built from, an Adam optimizer and the DGFW checkpoint container.
"""

from .checkpoint import checkpoint_id, load_checkpoint, save_checkpoint
from .nn import Conv2d, Linear, Module
from .ops import concat, conv2d, l1_loss, leaky_relu, linear, mse_loss
from .ops import upsample_nearest
from .optim import Adam, AdamState, adam_step
from .random import derive_seed, randn, rng
from .tensor import Tensor, no_grad

__all__ = [
    "Adam",
    "AdamState",
    "Conv2d",
    "Linear",
    "Module",
    "Tensor",
    "adam_step",
    "checkpoint_id",
    "concat",
    "conv2d",
    "derive_seed",
    "l1_loss",
    "leaky_relu",
    "linear",
    "load_checkpoint",
    "mse_loss",
    "no_grad",
    "randn",
    "rng",
    "save_checkpoint",
    "upsample_nearest",
]

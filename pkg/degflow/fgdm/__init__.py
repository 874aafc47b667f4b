"""
FGDM - Fourier prior guided degradation module.

Stage one of the pipeline: AENet enhances the amplitude of a DT-LR image and
the result is recombined with a guide image's phase.
"""

from .aenet import AENet, ResidualBlock, aenet_forward, enhance
from .module import FgdmCheckpoint, fgdm_apply, fgdm_apply_batch, fgdm_train

__all__ = [
    "AENet",
    "FgdmCheckpoint",
    "ResidualBlock",
    "aenet_forward",
    "enhance",
    "fgdm_apply",
    "fgdm_apply_batch",
    "fgdm_train",
]

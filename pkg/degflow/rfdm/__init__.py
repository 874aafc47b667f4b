"""
RFDM - rectified flow degradation module.

Stage two of the pipeline transports a noisy FGDM output to a realistically
degraded LR image by integrating a learned velocity field. The integrator in
:mod:`degflow.rfdm.flow` does not care where velocities come from; this module
defines the interface it expects. :class:`VelocityField` is implemented by the
trained network adapter and by the closed-form fields the integrator is tested
against.
"""

import abc

import numpy as np


class VelocityField(metaclass=abc.ABCMeta):
    """Interface for a time-dependent vector field over images.

    .. automethod:: __call__
    """

    @abc.abstractmethod
    def __call__(self, z: np.ndarray, t: float) -> np.ndarray:
        """Evaluate the field.

        Args:
            z (np.ndarray): The state, usually an (N, C, H, W) batch.
            t (float): Flow time in [0, 1).

        Returns:
            np.ndarray: The velocity, same shape as ``z``.
        """
        raise NotImplementedError("__call__ must be implemented.")

"""
Rectified flow: linear interpolation paths, the flow-matching loss and an
explicit Euler integrator.

The straight path from ``x0`` to ``x1`` is ``x_t = t * x1 + (1 - t) * x0`` and
its velocity is the constant ``x1 - x0``. A velocity network is trained to
regress that constant from ``(x_t, t)``; sampling integrates the network from
``t = 0`` to ``t = 1``.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from degflow.autodiff import ops
from degflow.autodiff.nn import Module
from degflow.autodiff.random import randn
from degflow.autodiff.tensor import DEFAULT_DTYPE, Tensor, no_grad
from degflow.enums import Stream
from degflow.exceptions import NonFiniteError, ShapeError
from degflow.rfdm import VelocityField

logger = logging.getLogger(__name__)


def _expand_time(t, x: np.ndarray) -> np.ndarray:
    """Per-sample times (N,) become (N, 1, ..., 1) so they broadcast over x."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 1 and x.ndim > 1:
        if t.shape[0] != x.shape[0]:
            raise ShapeError(f"{t.shape[0]} times for a batch of {x.shape[0]}")
        return t.reshape((-1,) + (1,) * (x.ndim - 1))
    return t


def interpolate(x0: np.ndarray, x1: np.ndarray, t) -> np.ndarray:
    """``t * x1 + (1 - t) * x0``; exact at both endpoints."""
    t = _expand_time(t, x0)
    return t * x1 + (1.0 - t) * x0


@dataclass
class FlowSample:
    x0: np.ndarray
    x1: np.ndarray
    t: np.ndarray
    x_t: np.ndarray

    @property
    def target(self) -> np.ndarray:
        """The straight-path velocity ``x1 - x0``."""
        return self.x1 - self.x0


def make_flow_sample(
    x_bar: np.ndarray,
    x_real: np.ndarray,
    noise_level: float,
    t,
    seed: int,
) -> FlowSample:
    """Builds one training example: ``x0 = x_bar + noise_level * n`` with
    ``n ~ N(0, I)`` from the ``NOISE`` stream of ``seed``, ``x1 = x_real`` and
    the interpolant at ``t`` (a scalar, or one time per batch item).

    Raises:
        ShapeError: ``x_bar`` and ``x_real`` differ in shape.
        ValueError: ``noise_level`` is negative or ``t`` leaves [0, 1].
    """
    x_bar = np.asarray(x_bar, dtype=np.float64)
    x_real = np.asarray(x_real, dtype=np.float64)
    if x_bar.shape != x_real.shape:
        raise ShapeError(f"x_bar {x_bar.shape} vs x_real {x_real.shape}")
    if noise_level < 0:
        raise ValueError(f"noise level must be >= 0, got {noise_level}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("t must lie in [0, 1]")
    noise = randn(x_bar.shape, seed, Stream.NOISE, dtype=np.float64)
    x0 = x_bar + noise_level * noise
    return FlowSample(x0=x0, x1=x_real, t=t, x_t=interpolate(x0, x_real, t))


def _batch_times(t: np.ndarray, n: int) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.full(n, float(t)) if t.ndim == 0 else t


def flow_loss(vnet: Module, sample: FlowSample) -> Tensor:
    """Mean squared error between ``x1 - x0`` and ``vnet(x_t, t)``."""
    dtype = _module_dtype(vnet)
    times = _batch_times(sample.t, sample.x_t.shape[0])
    prediction = vnet(Tensor(sample.x_t.astype(dtype)), times)
    return ops.mse_loss(prediction, sample.target.astype(dtype))


def _module_dtype(module: Module):
    params = module.parameters()
    return params[0].dtype if params else DEFAULT_DTYPE


def euler_integrate(field: VelocityField, x0: np.ndarray, steps: int) -> np.ndarray:
    """Integrates ``dz/dt = field(z, t)`` from 0 to 1 in ``steps`` equal steps.

    Returns the final state, unclamped.

    Raises:
        NonFiniteError: The state left the finite domain; the message names
            the step.
    """
    if steps < 1:
        raise ValueError(f"Euler steps must be >= 1, got {steps}")
    dt = 1.0 / steps
    z = np.array(x0, dtype=np.float64, copy=True)
    for i in range(steps):
        z = z + dt * field(z, i / steps)
        if not np.all(np.isfinite(z)):
            raise NonFiniteError(f"Euler state at step {i}")
    return z


def conditional_velocity_oracle(
    pairs: Sequence[tuple[np.ndarray, np.ndarray]],
    noise_level: float,
    z: np.ndarray,
    t: float,
) -> np.ndarray:
    """Closed-form ``E[x1 - x0 | x_t = z]`` for a finite set of ``(x_bar, x1)``
    pairs drawn uniformly, with ``x0 = x_bar + noise_level * n``.

    Given pair ``i``, ``x_t`` is Gaussian around ``m_i = t * x1_i + (1 - t) *
    x_bar_i`` with std ``(1 - t) * noise_level``; pairs are weighted by that
    likelihood and the noise is replaced by its posterior mean.

    Raises:
        ValueError: ``t`` is outside [0, 1), ``noise_level`` is not positive
            or ``pairs`` is empty.
    """
    if not 0.0 <= t < 1.0:
        raise ValueError(f"oracle needs t in [0, 1), got {t}")
    if noise_level <= 0:
        raise ValueError("oracle needs a positive noise level")
    if not pairs:
        raise ValueError("oracle needs at least one pair")
    z = np.asarray(z, dtype=np.float64)
    spread = (1.0 - t) * noise_level
    residuals, log_weights = [], []
    for x_bar, x1 in pairs:
        r = z - t * np.asarray(x1) - (1.0 - t) * np.asarray(x_bar)
        residuals.append(r)
        log_weights.append(-float(np.sum(r * r)) / (2.0 * spread * spread))
    weights = special.softmax(np.array(log_weights))
    velocity = np.zeros_like(z)
    for w, (x_bar, x1), r in zip(weights, pairs, residuals):
        expected_noise = r / spread
        drift = np.asarray(x1) - np.asarray(x_bar)
        velocity += w * (drift - noise_level * expected_noise)
    return velocity


class ConstantVelocityField(VelocityField):
    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)

    def __call__(self, z, t):
        return np.broadcast_to(self.value, np.shape(z)).copy()


class LinearVelocityField(VelocityField):
    """``v(z, t) = coefficient * z``."""

    def __init__(self, coefficient: float = -1.0):
        self.coefficient = coefficient

    def __call__(self, z, t):
        return self.coefficient * np.asarray(z)


class ConditionalVelocityField(VelocityField):
    """The oracle field of a fixed set of pairs."""

    def __init__(self, pairs, noise_level: float):
        self.pairs = list(pairs)
        self.noise_level = noise_level

    def __call__(self, z, t):
        return conditional_velocity_oracle(self.pairs, self.noise_level, z, t)


class NetworkVelocityField(VelocityField):
    """Adapts a velocity network to the integrator; runs without a tape."""

    def __init__(self, net: Module):
        self.net = net
        self.dtype = _module_dtype(net)

    def __call__(self, z, t):
        z = np.asarray(z)
        with no_grad():
            out = self.net(Tensor(z.astype(self.dtype)), np.full(z.shape[0], t))
        return out.data.astype(np.float64)


class ConstantField(Module):
    """A learnable image-shaped velocity that ignores ``(x_t, t)``."""

    def __init__(self, shape, dtype=np.float64):
        super().__init__()
        self.value = Tensor(np.zeros(shape), requires_grad=True, dtype=dtype)

    def forward(self, x_t: Tensor, t=None) -> Tensor:
        return Tensor(np.zeros(x_t.shape, dtype=self.value.dtype)) + self.value

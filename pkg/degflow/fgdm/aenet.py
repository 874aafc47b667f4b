import numpy as np

from degflow.autodiff import ops
from degflow.autodiff.nn import Conv2d, Module
from degflow.autodiff.random import rng
from degflow.autodiff.tensor import DEFAULT_DTYPE, Tensor, no_grad
from degflow.enums import Stream
from degflow.models import AENetConfig


class ResidualBlock(Module):
    """conv -> leaky ReLU -> conv with an additive skip."""

    def __init__(self, channels: int, kernel_size: int, g, dtype=DEFAULT_DTYPE):
        super().__init__()
        self.conv1 = Conv2d(channels, channels, kernel_size, g, dtype=dtype)
        self.conv2 = Conv2d(channels, channels, kernel_size, g, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return x + self.conv2(ops.leaky_relu(self.conv1(x)))


class AENet(Module):
    """
    Amplitude enhancement network.

    Works on log-compressed amplitude ``L = ln(1 + A)`` of one plane at a time
    (channels share weights) and returns ``A' = exp(L + f(L)) - 1``, evaluated
    as ``A + (1 + A) * expm1(f)`` so a zero residual returns ``A`` bit for bit,
    and floored at zero. The last convolution starts at zero, so a fresh
    network is the identity.
    """

    def __init__(
        self,
        config: AENetConfig | None = None,
        seed: int = 0,
        dtype=DEFAULT_DTYPE,
    ):
        super().__init__()
        self.config = config or AENetConfig()
        g = rng(seed, Stream.INIT)
        c, k = self.config.base_channels, self.config.kernel_size
        self.head = Conv2d(1, c, k, g, dtype=dtype)
        self.block_names = []
        for i in range(self.config.residual_blocks):
            name = f"block{i}"
            setattr(self, name, ResidualBlock(c, k, g, dtype=dtype))
            self.block_names.append(name)
        self.tail = Conv2d(c, 1, k, g, zero_init=True, dtype=dtype)

    def residual(self, log_amplitude: Tensor) -> Tensor:
        """f(L) for (M, 1, H, W) planes."""
        x = ops.leaky_relu(self.head(log_amplitude))
        for name in self.block_names:
            x = getattr(self, name)(x)
        return self.tail(x)

    def forward(self, amplitude: Tensor) -> Tensor:
        """Enhances an (N, C, H, W) amplitude batch, each channel on its own."""
        n, c, h, w = amplitude.shape
        planes = amplitude.reshape(n * c, 1, h, w)
        f = self.residual(planes.log1p())
        enhanced = planes + (planes + 1.0) * f.expm1()
        return enhanced.clamp_min(0.0).reshape(n, c, h, w)


def enhance(net: AENet, amplitude: np.ndarray) -> np.ndarray:
    """Inference path for an (N, C, H, W) float64 amplitude batch.

    Only the residual runs at network precision; the exponential update is
    applied in float64, so a zero residual returns ``amplitude`` exactly.
    """
    n, c, h, w = amplitude.shape
    planes = amplitude.reshape(n * c, 1, h, w)
    with no_grad():
        log_amp = Tensor(np.log1p(planes).astype(net.head.weight.dtype))
        f = net.residual(log_amp).data.astype(np.float64)
    enhanced = planes + (planes + 1.0) * np.expm1(f)
    return np.maximum(enhanced, 0.0).reshape(n, c, h, w)


def aenet_forward(net: AENet, amplitude: np.ndarray) -> np.ndarray:
    """Enhances an (H, W, C) amplitude plane.

    Raises:
        ValueError: The amplitude has negative entries.
    """
    amplitude = np.asarray(amplitude, dtype=np.float64)
    if np.any(amplitude < 0):
        raise ValueError("amplitude plane must be nonnegative")
    batch = np.transpose(amplitude, (2, 0, 1))[None]
    return np.transpose(enhance(net, batch)[0], (1, 2, 0))

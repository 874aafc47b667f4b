import math

import numpy as np

from degflow.autodiff import ops
from degflow.autodiff.nn import Conv2d, Linear, Module
from degflow.autodiff.random import rng
from degflow.autodiff.tensor import DEFAULT_DTYPE, Tensor
from degflow.enums import Stream
from degflow.exceptions import ShapeError
from degflow.models import VelocityNetConfig

TIME_SCALE = 1000.0
MAX_PERIOD = 10000.0
LEVELS = 2


def sinusoidal_embedding(t: np.ndarray, dim: int) -> np.ndarray:
    """(N, dim) embedding of flow times: sines then cosines of ``t * 1000``
    at geometrically spaced frequencies."""
    half = dim // 2
    freqs = np.exp(-math.log(MAX_PERIOD) * np.arange(half) / half)
    args = TIME_SCALE * np.asarray(t, dtype=np.float64)[:, None] * freqs[None, :]
    return np.concatenate([np.sin(args), np.cos(args)], axis=1)


class VelocityUNet(Module):
    """
    Two-level encoder/decoder predicting a velocity in image space.

    The time embedding goes through one learned affine map per level and is
    added to that level's feature map. Skips are concatenated on the way up.
    The output convolution starts at zero, so a fresh network predicts the
    zero field. Height and width must be divisible by 4.
    """

    def __init__(
        self,
        config: VelocityNetConfig | None = None,
        seed: int = 0,
        dtype=DEFAULT_DTYPE,
    ):
        super().__init__()
        self.config = config or VelocityNetConfig()
        g = rng(seed, Stream.INIT)
        c, img, d = (
            self.config.base_channels,
            self.config.image_channels,
            self.config.time_dim,
        )
        self.inc = Conv2d(img, c, 3, g, dtype=dtype)
        self.time0 = Linear(d, c, g, dtype=dtype)
        self.enc0 = Conv2d(c, c, 3, g, dtype=dtype)
        self.down1 = Conv2d(c, 2 * c, 3, g, stride=2, padding=1, dtype=dtype)
        self.time1 = Linear(d, 2 * c, g, dtype=dtype)
        self.down2 = Conv2d(2 * c, 2 * c, 3, g, stride=2, padding=1, dtype=dtype)
        self.time2 = Linear(d, 2 * c, g, dtype=dtype)
        self.mid = Conv2d(2 * c, 2 * c, 3, g, dtype=dtype)
        self.up1 = Conv2d(4 * c, 2 * c, 3, g, dtype=dtype)
        self.up0 = Conv2d(3 * c, c, 3, g, dtype=dtype)
        self.out = Conv2d(c, img, 3, g, zero_init=True, dtype=dtype)
        self.dtype = dtype

    def _time(self, layer: Linear, emb: Tensor) -> Tensor:
        n = emb.shape[0]
        return layer(emb).reshape(n, -1, 1, 1)

    def forward(self, x: Tensor, t) -> Tensor:
        n, _, h, w = x.shape
        factor = 2**LEVELS
        if h % factor or w % factor:
            raise ShapeError(
                f"velocity net needs sizes divisible by {factor}, got {h}x{w}"
            )
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), (n,))
        emb = Tensor(sinusoidal_embedding(t, self.config.time_dim).astype(self.dtype))

        act = ops.leaky_relu
        h0 = act(self.inc(x)) + self._time(self.time0, emb)
        h0 = act(self.enc0(h0))
        h1 = act(self.down1(h0)) + self._time(self.time1, emb)
        h2 = act(self.down2(h1)) + self._time(self.time2, emb)
        m = act(self.mid(h2))
        u1 = act(self.up1(ops.concat([ops.upsample_nearest(m), h1])))
        u0 = act(self.up0(ops.concat([ops.upsample_nearest(u1), h0])))
        return self.out(u0)

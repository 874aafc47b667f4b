import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from degflow.autodiff.checkpoint import load_checkpoint, save_checkpoint, with_prefix
from degflow.autodiff.nn import Module
from degflow.autodiff.optim import Adam
from degflow.autodiff.random import derive_seed, randn, rng
from degflow.autodiff.tensor import DEFAULT_DTYPE
from degflow.enums import Stream
from degflow.exceptions import CheckpointError, CorpusEmptyError
from degflow.fgdm.module import FgdmCheckpoint, fgdm_apply_batch
from degflow.imaging.ops import from_nchw, to_nchw
from degflow.models import EulerConfig, TrainConfig, VelocityNetConfig
from degflow.rfdm.flow import (
    NetworkVelocityField,
    euler_integrate,
    flow_loss,
    make_flow_sample,
)
from degflow.rfdm.unet import VelocityUNet
from degflow.training import LOSS_TAIL, sample_patches, train_loop

logger = logging.getLogger(__name__)

PREFIX = "rfdm."

BatchFn = Callable[[int], tuple[np.ndarray, np.ndarray]]


@dataclass
class RfdmCheckpoint:
    net: VelocityUNet
    noise_level: float = 0.1
    steps: int = 0
    loss_tail: list[float] = field(default_factory=list)

    def __post_init__(self):
        # stored as float32; keep the in-memory value identical to a reload
        self.noise_level = float(np.float32(self.noise_level))

    def tensors(self) -> dict[str, np.ndarray]:
        cfg = self.net.config
        out = dict(self.net.state_dict(PREFIX))
        out[PREFIX + "meta.arch"] = np.array(
            [cfg.base_channels, cfg.time_dim, cfg.image_channels]
        )
        out[PREFIX + "meta.lambda"] = np.array([self.noise_level])
        out[PREFIX + "meta.steps"] = np.array([self.steps])
        out[PREFIX + "meta.loss_tail"] = np.array(self.loss_tail[-LOSS_TAIL:])
        return out

    def save(self, path: str) -> None:
        save_checkpoint(path, self.tensors())

    @classmethod
    def load(cls, path: str, dtype=DEFAULT_DTYPE) -> "RfdmCheckpoint":
        tensors = with_prefix(load_checkpoint(path), PREFIX)
        try:
            base, time_dim, channels = (int(v) for v in tensors["meta.arch"])
            noise_level = float(tensors["meta.lambda"][0])
            steps = int(tensors["meta.steps"][0])
            config = VelocityNetConfig(base, time_dim, channels)
        except KeyError as e:
            raise CheckpointError(f"{path} is not an RFDM checkpoint: {e}") from e
        except (ValueError, IndexError) as e:
            raise CheckpointError(f"{path}: malformed RFDM metadata: {e}") from e
        net = VelocityUNet(config, dtype=dtype)
        try:
            net.load_state_dict(tensors)
        except KeyError as e:
            raise CheckpointError(f"{path}: {e}") from e
        return cls(
            net=net,
            noise_level=noise_level,
            steps=steps,
            loss_tail=[float(v) for v in tensors["meta.loss_tail"]],
        )


def fit_velocity(
    net: Module,
    batch_fn: BatchFn,
    train_cfg: TrainConfig,
    seed: int = 0,
    desc: str = "rfdm",
) -> list[float]:
    """Adam-minimizes the flow loss over batches ``batch_fn(step) -> (x_bar,
    x1)``, both (N, C, H, W). Times are uniform on [0, 1] per item and noise is
    fresh every step."""
    optimizer = Adam(net.named_parameters(), learning_rate=train_cfg.learning_rate)

    def step_fn(step: int) -> float:
        x_bar, x1 = batch_fn(step)
        step_seed = derive_seed(seed, step)
        t = rng(step_seed, Stream.TIME).uniform(0.0, 1.0, size=x1.shape[0])
        sample = make_flow_sample(x_bar, x1, train_cfg.noise_level, t, step_seed)
        optimizer.zero_grad()
        loss = flow_loss(net, sample)
        loss.backward()
        optimizer.step()
        return loss.item()

    return train_loop(step_fn, train_cfg.steps, train_cfg.log_every, desc=desc)


def rfdm_train(
    lr_corpus: Sequence[np.ndarray],
    fgdm_ckpt: FgdmCheckpoint,
    vnet_cfg: VelocityNetConfig | None = None,
    train_cfg: TrainConfig | None = None,
    seed: int = 0,
    dtype=DEFAULT_DTYPE,
) -> tuple[RfdmCheckpoint, list[float]]:
    """Trains the velocity network to carry noisy FGDM outputs of real LR
    patches back to those patches. The FGDM checkpoint is only evaluated,
    never updated.

    Returns the checkpoint and the per-step loss history.
    """
    if not lr_corpus:
        raise CorpusEmptyError("RFDM training needs at least one real LR image")
    cfg = train_cfg or TrainConfig(steps=3000)
    vnet_cfg = vnet_cfg or VelocityNetConfig()
    channels = lr_corpus[0].shape[2]
    if vnet_cfg.image_channels != channels:
        vnet_cfg = dataclasses.replace(vnet_cfg, image_channels=channels)
    net = VelocityUNet(vnet_cfg, seed=seed, dtype=dtype)

    def batch_fn(step: int):
        patches = sample_patches(lr_corpus, cfg.batch_size, cfg.patch_size, seed, step)
        x_bar = fgdm_apply_batch(patches, fgdm_ckpt)
        return to_nchw(x_bar, np.float64), to_nchw(patches, np.float64)

    losses = fit_velocity(net, batch_fn, cfg, seed)
    checkpoint = RfdmCheckpoint(net, cfg.noise_level, cfg.steps, losses[-LOSS_TAIL:])
    return checkpoint, losses


def rfdm_apply(
    lr_bar: np.ndarray,
    checkpoint: RfdmCheckpoint,
    noise_level: float | None = None,
    steps: int = EulerConfig().steps,
    seed: int = 0,
) -> np.ndarray:
    """Refines an FGDM output: adds ``noise_level`` Gaussian noise (the
    checkpoint's training level when None) and integrates the learned flow in
    ``steps`` Euler steps. The result is not clamped.
    """
    if noise_level is None:
        noise_level = checkpoint.noise_level
    if noise_level < 0:
        raise ValueError(f"noise level must be >= 0, got {noise_level}")
    x_bar = to_nchw(lr_bar, np.float64)
    x0 = x_bar + noise_level * randn(x_bar.shape, seed, Stream.NOISE, np.float64)
    out = euler_integrate(NetworkVelocityField(checkpoint.net), x0, steps)
    return from_nchw(out)[0]

from dataclasses import dataclass, field

from degflow.enums import FilterKind


@dataclass(frozen=True)
class DtlrSpec:
    """Repeated down-up resampling that turns an LR image into a DT-LR image."""

    iterations: int = 10
    scale: int = 4
    filter: FilterKind = field(default=FilterKind.BILINEAR)

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.scale < 2:
            raise ValueError(f"scale must be >= 2, got {self.scale}")
        object.__setattr__(self, "filter", FilterKind(self.filter))


@dataclass(frozen=True)
class AENetConfig:
    base_channels: int = 32
    residual_blocks: int = 3
    kernel_size: int = 3

    def __post_init__(self):
        if self.residual_blocks < 1:
            raise ValueError("residual_blocks must be >= 1")
        if self.kernel_size % 2 != 1:
            raise ValueError("kernel_size must be odd so planes keep their size")


@dataclass(frozen=True)
class VelocityNetConfig:
    base_channels: int = 32
    time_dim: int = 64
    image_channels: int = 3

    def __post_init__(self):
        if self.time_dim % 2 != 0:
            raise ValueError("time_dim must be even (sine and cosine halves)")


@dataclass(frozen=True)
class EulerConfig:
    steps: int = 20

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"Euler steps must be >= 1, got {self.steps}")


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    batch_size: int = 8
    patch_size: int = 32
    learning_rate: float = 1e-4
    log_every: int = 100
    # rfdm only
    noise_level: float = 0.1


@dataclass
class ManifestRow:
    hr_path: str
    lr_path: str
    seed: int
    fgdm_ckpt: str = "none"
    rfdm_ckpt: str = "none"
    euler_steps: int = 0

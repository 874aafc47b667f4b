"""
Run configuration.

A config file is flat ``key = value`` text; ``#`` starts a comment and blank
lines are ignored. Every key is optional and falls back to its default, but a
key that is not documented here, or appears twice, is an error.

The config path can come from ``--config`` or the ``DEGFLOW_CONFIG``
environment variable.
"""

import dataclasses
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from degflow.enums import FilterKind, Precision
from degflow.exceptions import ConfigError
from degflow.models import (
    AENetConfig,
    DtlrSpec,
    EulerConfig,
    TrainConfig,
    VelocityNetConfig,
)

CONFIG_ENV = "DEGFLOW_CONFIG"
LOG_LEVEL_ENV = "DEGFLOW_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "INFO"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class RunConfig:
    hr_dir: str = "corpus/hr"
    lr_dir: str = "corpus/lr"
    heldout_dir: str = "corpus/heldout"
    out_dir: str = "runs/default"
    seed: int = 0
    precision: Precision = Precision.FLOAT32
    dtlr_iterations: int = 10
    dtlr_scale: int = 4
    dtlr_filter: FilterKind = FilterKind.BILINEAR
    aenet_base_channels: int = 32
    aenet_residual_blocks: int = 3
    aenet_kernel_size: int = 3
    vnet_base_channels: int = 32
    vnet_time_dim: int = 64
    rfdm_lambda: float = 0.1
    euler_steps: int = 20
    fgdm_steps: int = 2000
    rfdm_steps: int = 3000
    batch_size: int = 8
    patch_size: int = 32
    fgdm_learning_rate: float = 1e-4
    rfdm_learning_rate: float = 1e-4
    lambda_study_steps: int = 500
    eval_crop: int = 0
    workers: int = 1
    log_every: int = 100
    corpus_train_images: int = 24
    corpus_hr_images: int = 24
    corpus_heldout_images: int = 8
    corpus_hr_size: int = 128

    def __post_init__(self):
        for key, kind in (("dtlr_filter", FilterKind), ("precision", Precision)):
            try:
                object.__setattr__(self, key, kind(getattr(self, key)))
            except ValueError:
                raise ConfigError(f"unknown {key} {getattr(self, key)!r}") from None
        for f in dataclasses.fields(self):
            _check(f.name, getattr(self, f.name))

    # derived settings

    @property
    def dtype(self):
        return np.float64 if self.precision == Precision.FLOAT64 else np.float32

    def dtlr_spec(self) -> DtlrSpec:
        return DtlrSpec(self.dtlr_iterations, self.dtlr_scale, self.dtlr_filter)

    def aenet_config(self) -> AENetConfig:
        return AENetConfig(
            self.aenet_base_channels, self.aenet_residual_blocks, self.aenet_kernel_size
        )

    def vnet_config(self, image_channels: int = 3) -> VelocityNetConfig:
        return VelocityNetConfig(
            self.vnet_base_channels, self.vnet_time_dim, image_channels
        )

    def euler_config(self) -> EulerConfig:
        return EulerConfig(self.euler_steps)

    def fgdm_train_config(self) -> TrainConfig:
        return TrainConfig(
            steps=self.fgdm_steps,
            batch_size=self.batch_size,
            patch_size=self.patch_size,
            learning_rate=self.fgdm_learning_rate,
            log_every=self.log_every,
        )

    def rfdm_train_config(self, steps: int | None = None, noise_level=None):
        return TrainConfig(
            steps=self.rfdm_steps if steps is None else steps,
            batch_size=self.batch_size,
            patch_size=self.patch_size,
            learning_rate=self.rfdm_learning_rate,
            log_every=self.log_every,
            noise_level=self.rfdm_lambda if noise_level is None else noise_level,
        )

    # text form

    def to_text(self) -> str:
        lines = [f"{k} = {_format(v)}" for k, v in sorted(self.as_dict().items())]
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """Parses config text.

        Raises:
            ConfigError: A line is malformed, a key is unknown or repeated, or
                a value does not parse or is out of range. Carries the line
                number.
        """
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                message = f"expected 'key = value', got {raw.strip()!r}"
                raise ConfigError(message, number)
            if key not in types:
                raise ConfigError(f"unknown key {key!r}", number)
            if key in values:
                raise ConfigError(f"duplicate key {key!r}", number)
            try:
                parsed = _PARSERS[types[key]](value)
            except ValueError:
                raise ConfigError(
                    f"cannot parse {value!r} for {key!r}", number
                ) from None
            try:
                _check(key, parsed)
            except ConfigError as e:
                raise ConfigError(e.message, number) from None
            values[key] = parsed
        return cls(**values)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path) as fp:
                text = fp.read()
        except (IOError, OSError) as e:
            raise ConfigError(f"Failed to read config at {path}: {e}") from e
        return cls.from_text(text)

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with the given keys replaced; ``None`` values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def save(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w") as fp:
            fp.write(self.to_text())


def _format(value) -> str:
    if isinstance(value, (FilterKind, Precision)):
        return value.value
    return repr(value) if isinstance(value, float) else str(value)


_PARSERS: dict[type, Callable[[str], object]] = {
    str: str,
    int: int,
    float: float,
    FilterKind: FilterKind,
    Precision: Precision,
}

_POSITIVE = {
    "dtlr_scale",
    "aenet_base_channels",
    "aenet_residual_blocks",
    "aenet_kernel_size",
    "vnet_base_channels",
    "vnet_time_dim",
    "euler_steps",
    "batch_size",
    "patch_size",
    "fgdm_learning_rate",
    "rfdm_learning_rate",
    "workers",
    "corpus_hr_size",
}

_NONNEGATIVE = {
    "dtlr_iterations",
    "rfdm_lambda",
    "fgdm_steps",
    "rfdm_steps",
    "lambda_study_steps",
    "eval_crop",
    "log_every",
    "corpus_train_images",
    "corpus_hr_images",
    "corpus_heldout_images",
}


def _check(key: str, value) -> None:
    if key in _POSITIVE and not value > 0:
        raise ConfigError(f"{key} must be > 0, got {value}")
    if key in _NONNEGATIVE and value < 0:
        raise ConfigError(f"{key} must be >= 0, got {value}")
    if key == "dtlr_scale" and value < 2:
        raise ConfigError(f"dtlr_scale must be >= 2, got {value}")
    if key == "aenet_kernel_size" and value % 2 != 1:
        raise ConfigError("aenet_kernel_size must be odd")
    if key == "vnet_time_dim" and value % 2 != 0:
        raise ConfigError("vnet_time_dim must be even")
    if key == "dtlr_filter" and not isinstance(value, FilterKind):
        raise ConfigError(f"unknown filter {value!r}")
    if key == "precision" and not isinstance(value, Precision):
        raise ConfigError(f"unknown precision {value!r}")


def load_config(path: str | None = None) -> RunConfig:
    """Reads ``path``, else the file named by ``DEGFLOW_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    return RunConfig.from_file(path)


def log_level(override: str | None = None) -> str:
    """The ``--log-level`` value, else ``DEGFLOW_LOG_LEVEL``, else INFO."""
    level = (override or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()
    if level not in LOG_LEVELS:
        raise ConfigError(f"unknown log level {level!r}")
    return level

import abc
import math
from collections import OrderedDict
from typing import Iterator

import numpy as np

from degflow.autodiff import ops
from degflow.autodiff.tensor import DEFAULT_DTYPE, Tensor
from degflow.exceptions import ShapeError


class Module(metaclass=abc.ABCMeta):
    """Base class for networks built from tensors.

    Attributes holding a :class:`Tensor` with ``requires_grad`` are registered
    as parameters and attributes holding a :class:`Module` as children, both
    in assignment order, which fixes the order of ``named_parameters``.
    """

    def __init__(self):
        object.__setattr__(self, "_parameters", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())

    def __setattr__(self, name, value):
        if isinstance(value, Tensor) and value.requires_grad:
            self._parameters[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    @abc.abstractmethod
    def forward(self, *args, **kwargs):
        raise NotImplementedError("forward must be implemented.")

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, param in self._parameters.items():
            yield f"{prefix}{name}", param
        for name, module in self._modules.items():
            yield from module.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self, prefix: str = "") -> "OrderedDict[str, np.ndarray]":
        return OrderedDict(
            (name, p.data.copy()) for name, p in self.named_parameters(prefix)
        )

    def load_state_dict(self, state: dict, prefix: str = "") -> None:
        """Copies arrays into the parameters, casting to each parameter's dtype."""
        for name, param in self.named_parameters(prefix):
            if name not in state:
                raise KeyError(f"missing parameter {name!r} in state")
            value = np.asarray(state[name])
            if value.shape != param.shape:
                raise ShapeError(
                    f"parameter {name!r} has shape {param.shape}, state has "
                    f"{value.shape}"
                )
            param.data = value.astype(param.dtype)

    def astype(self, dtype) -> "Module":
        for p in self.parameters():
            p.data = p.data.astype(dtype)
        return self


def _uniform(rng: np.random.Generator, shape, fan_in: int, dtype) -> Tensor:
    bound = 1.0 / math.sqrt(fan_in)
    data = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return Tensor(data, requires_grad=True, dtype=dtype)


class Conv2d(Module):
    """2D convolution; ``zero_init`` zeroes weight and bias."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        stride: int = 1,
        padding: int | None = None,
        zero_init: bool = False,
        dtype=DEFAULT_DTYPE,
    ):
        super().__init__()
        self.stride = stride
        self.padding = kernel_size // 2 if padding is None else padding
        shape = (out_channels, in_channels, kernel_size, kernel_size)
        fan_in = in_channels * kernel_size * kernel_size
        # draw even when zero-initialized so later layers see the same stream
        self.weight = _uniform(rng, shape, fan_in, dtype)
        self.bias = _uniform(rng, (out_channels,), fan_in, dtype)
        if zero_init:
            self.weight.data[...] = 0
            self.bias.data[...] = 0

    def forward(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, self.stride, self.padding)


class Linear(Module):
    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        dtype=DEFAULT_DTYPE,
    ):
        super().__init__()
        self.weight = _uniform(rng, (out_features, in_features), in_features, dtype)
        self.bias = _uniform(rng, (out_features,), in_features, dtype)

    def forward(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)

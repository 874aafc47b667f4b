from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from degflow.autodiff.tensor import Tensor
from degflow.exceptions import NonFiniteError, ShapeError


@dataclass
class AdamState:
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
) -> None:
    """Applies one bias-corrected Adam update to ``params`` in place.

    Raises:
        NonFiniteError: A gradient holds NaN or Inf; nothing is updated.
        ShapeError: A gradient or moment buffer does not match its parameter.
    """
    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise ShapeError(
                f"gradient for {name!r} has shape {grad.shape}, parameter has "
                f"{param.shape}"
            )
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"gradient of parameter {name!r}")

    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**t
    correction2 = 1.0 - b2**t
    for name, param in params.items():
        grad = grads[name].astype(param.dtype)
        m = state.first_moment.setdefault(name, np.zeros_like(param.data))
        v = state.second_moment.setdefault(name, np.zeros_like(param.data))
        if m.shape != param.shape:
            raise ShapeError(f"moment buffer for {name!r} does not match parameter")
        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        update = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
        param.data -= update.astype(param.dtype)


class Adam:
    """Adam over named parameters, reading gradients from ``Tensor.grad``."""

    def __init__(
        self,
        named_parameters,
        learning_rate: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        self.params = dict(named_parameters)
        self.state = AdamState(
            learning_rate=learning_rate, beta1=beta1, beta2=beta2, epsilon=epsilon
        )

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        grads = {
            name: p.grad if p.grad is not None else np.zeros_like(p.data)
            for name, p in self.params.items()
        }
        adam_step(self.params, grads, self.state)

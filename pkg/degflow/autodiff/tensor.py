"""
Tensor and the reverse-mode tape.

A :class:`Tensor` wraps a ``numpy.ndarray``. Operations on tensors that
require gradients record their parents and a backward closure on the output;
:meth:`Tensor.backward` walks that record once in reverse topological order and
then releases it. The tape is single-use: every training step builds a fresh
one, and calling ``backward`` twice on the same loss is a :class:`GraphError`.

Precision follows the data: float32 by default, float64 when the inputs are
float64 (the gradient-check tests run in float64).
"""

import contextlib
import threading
from typing import Callable, Sequence

import numpy as np

from degflow.exceptions import GraphError, NonFiniteError

DEFAULT_DTYPE = np.float32

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_grad_mode = threading.local()


@contextlib.contextmanager
def no_grad():
    """Disables tape recording inside the block, for the calling thread only."""
    previous = is_grad_enabled()
    _grad_mode.enabled = False
    try:
        yield
    finally:
        _grad_mode.enabled = previous


def is_grad_enabled() -> bool:
    return getattr(_grad_mode, "enabled", True)


def _check_finite(data: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(what)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sums ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    # numpy defers to Tensor's reflected operators
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, dtype=None, name=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            is_float = isinstance(data, np.ndarray) and data.dtype in (
                np.float32,
                np.float64,
            )
            dtype = data.dtype if is_float else DEFAULT_DTYPE
        self.data: np.ndarray = np.asarray(data, dtype=dtype)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple["Tensor", ...] = ()
        self._backward: BackwardFn | None = None
        self._op = ""
        self._consumed = False

    @classmethod
    def from_op(
        cls, data: np.ndarray, parents: Sequence["Tensor"], backward: BackwardFn, op
    ) -> "Tensor":
        """Creates the output of a differentiable operation."""
        _check_finite(data, f"output of {op}")
        requires_grad = is_grad_enabled() and any(p.requires_grad for p in parents)
        out = cls(data, requires_grad=requires_grad, dtype=data.dtype)
        if requires_grad:
            out._parents = tuple(parents)
            out._backward = backward
            out._op = op
        return out

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), dtype=self.dtype)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label})"

    def _wrap(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.dtype), dtype=self.dtype)

    # arithmetic

    def __add__(self, other):
        other = self._wrap(other)
        a_shape, b_shape = self.shape, other.shape

        def backward(g):
            return _unbroadcast(g, a_shape), _unbroadcast(g, b_shape)

        return Tensor.from_op(self.data + other.data, (self, other), backward, "add")

    __radd__ = __add__

    def __sub__(self, other):
        other = self._wrap(other)
        a_shape, b_shape = self.shape, other.shape

        def backward(g):
            return _unbroadcast(g, a_shape), _unbroadcast(-g, b_shape)

        return Tensor.from_op(self.data - other.data, (self, other), backward, "sub")

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        other = self._wrap(other)
        a, b = self.data, other.data

        def backward(g):
            return _unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)

        return Tensor.from_op(a * b, (self, other), backward, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._wrap(other)
        a, b = self.data, other.data

        def backward(g):
            return (
                _unbroadcast(g / b, a.shape),
                _unbroadcast(-g * a / (b * b), b.shape),
            )

        return Tensor.from_op(a / b, (self, other), backward, "div")

    def __rtruediv__(self, other):
        return self._wrap(other) / self

    def __neg__(self):
        return Tensor.from_op(-self.data, (self,), lambda g: (-g,), "neg")

    def __pow__(self, exponent: float):
        if isinstance(exponent, Tensor):
            raise TypeError("only scalar exponents are supported")
        a = self.data

        def backward(g):
            return (g * exponent * a ** (exponent - 1),)

        return Tensor.from_op(a**exponent, (self,), backward, "pow")

    # elementwise

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return Tensor.from_op(out, (self,), lambda g: (g * out,), "exp")

    def expm1(self) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.expm1(a), (self,), lambda g: (g * np.exp(a),), "expm1")

    def clamp_min(self, low: float) -> "Tensor":
        a = self.data
        keep = a >= low

        def backward(g):
            return (g * keep,)

        return Tensor.from_op(np.maximum(a, low), (self,), backward, "clamp_min")

    def log1p(self) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.log1p(a), (self,), lambda g: (g / (1 + a),), "log1p")

    def abs(self) -> "Tensor":
        a = self.data
        return Tensor.from_op(np.abs(a), (self,), lambda g: (g * np.sign(a),), "abs")

    # reductions and shape

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        out = np.asarray(self.data.sum(axis=axis, keepdims=keepdims))
        return Tensor.from_op(out, (self,), backward, "sum")

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.size if axis is None else np.prod(
            [self.shape[a] for a in np.atleast_1d(axis)]
        )
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        original = self.shape
        return Tensor.from_op(
            self.data.reshape(shape),
            (self,),
            lambda g: (g.reshape(original),),
            "reshape",
        )

    # tape

    def backward(self) -> None:
        """Accumulates d(self)/d(leaf) into ``grad`` of every leaf that
        requires gradients, then releases the recorded graph."""
        if self.size != 1:
            raise GraphError(f"backward needs a scalar loss, got shape {self.shape}")
        if self._consumed:
            raise GraphError("graph already consumed; rebuild it for a new step")
        if self._backward is None:
            raise GraphError("loss was not produced by a recorded computation")

        order = _topological_order(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                if node.requires_grad:
                    _check_finite(g, f"gradient of {node.name or 'leaf tensor'}")
                    node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                pg = np.asarray(pg, dtype=parent.dtype)
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg
        for node in order:
            if node._backward is not None:
                node._parents = ()
                node._backward = None
                node._consumed = True


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def as_tensor(data, dtype=None) -> Tensor:
    if isinstance(data, Tensor):
        return data
    return Tensor(data, dtype=dtype)

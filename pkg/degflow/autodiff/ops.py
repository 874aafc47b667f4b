"""Differentiable network operations on NCHW tensors."""

import numpy as np
from numpy.lib.stride_tricks import as_strided

from degflow.autodiff.tensor import Tensor, as_tensor
from degflow.exceptions import ShapeError

LEAKY_RELU_SLOPE = 0.2


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """Contiguous ``(N * Ho * Wo, C * KH * KW)`` patch matrix of a padded input."""
    n, c, hp, wp = xp.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    sn, sc, sh, sw = xp.strides
    view = as_strided(
        xp,
        shape=(n, ho, wo, c, kh, kw),
        strides=(sn, sh * stride, sw * stride, sc, sh, sw),
        writeable=False,
    )
    return np.ascontiguousarray(view).reshape(n * ho * wo, c * kh * kw)


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """Zero-padded cross-correlation of an NCHW input with an OIKK kernel.

    Output spatial size is ``(H + 2 * padding - K) // stride + 1``.
    """
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(
            f"conv2d expects NCHW input and OIKK kernel, got {x.shape} and "
            f"{weight.shape}"
        )
    n, c, h, w = x.shape
    o, i, kh, kw = weight.shape
    if c != i:
        raise ShapeError(f"conv2d channel mismatch: input {c} vs kernel {i}")
    if stride < 1 or padding < 0:
        raise ValueError("stride must be >= 1 and padding >= 0")
    hp, wp = h + 2 * padding, w + 2 * padding
    if kh > hp or kw > wp:
        raise ShapeError(
            f"kernel {kh}x{kw} larger than padded input {hp}x{wp}"
        )
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    cols = _im2col(xp, kh, kw, stride)
    kernel = weight.data
    out = (cols @ kernel.reshape(o, -1).T).reshape(n, ho, wo, o)
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    if bias is not None:
        out = out + bias.data.reshape(1, o, 1, 1)

    def backward(g):
        g_rows = g.transpose(0, 2, 3, 1).reshape(-1, o)
        grad_w = (g_rows.T @ cols).reshape(kernel.shape)
        # input gradient: full correlation of the dilated output gradient with
        # the flipped, channel-transposed kernel
        h_span = stride * (ho - 1) + 1
        w_span = stride * (wo - 1) + 1
        if stride > 1:
            dilated = np.zeros((n, o, h_span, w_span), dtype=g.dtype)
            dilated[:, :, ::stride, ::stride] = g
        else:
            dilated = g
        dilated = np.pad(
            dilated, ((0, 0), (0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1))
        )
        flipped = kernel[:, :, ::-1, ::-1].transpose(1, 0, 2, 3).reshape(c, -1)
        rows, cols_out = h_span + kh - 1, w_span + kw - 1
        full = (_im2col(dilated, kh, kw, 1) @ flipped.T).reshape(n, rows, cols_out, c)
        grad_xp = np.zeros(xp.shape, dtype=full.dtype)
        grad_xp[:, :, :rows, :cols_out] = full.transpose(0, 3, 1, 2)
        grad_x = grad_xp[:, :, padding : padding + h, padding : padding + w]
        grads = [grad_x, grad_w]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor.from_op(out, parents, backward, "conv2d")


def leaky_relu(x: Tensor, slope: float = LEAKY_RELU_SLOPE) -> Tensor:
    a = x.data
    positive = a > 0
    out = np.where(positive, a, slope * a).astype(a.dtype)

    def backward(g):
        return (g * np.where(positive, 1.0, slope).astype(a.dtype),)

    return Tensor.from_op(out, (x,), backward, "leaky_relu")


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """``x @ weight.T + bias`` for a (N, D_in) input and (D_out, D_in) weight."""
    a, w = x.data, weight.data
    out = a @ w.T
    if bias is not None:
        out = out + bias.data

    def backward(g):
        grads = [g @ w, g.T @ a]
        if bias is not None:
            grads.append(g.sum(axis=0))
        return grads

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor.from_op(out, parents, backward, "linear")


def concat(tensors: list[Tensor], axis: int = 1) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]
    out = np.concatenate([t.data for t in tensors], axis=axis)

    def backward(g):
        return np.split(g, bounds, axis=axis)

    return Tensor.from_op(out, tuple(tensors), backward, "concat")


def upsample_nearest(x: Tensor, factor: int = 2) -> Tensor:
    n, c, h, w = x.shape
    out = x.data.repeat(factor, axis=2).repeat(factor, axis=3)

    def backward(g):
        return (g.reshape(n, c, h, factor, w, factor).sum(axis=(3, 5)),)

    return Tensor.from_op(out, (x,), backward, "upsample_nearest")


def mse_loss(prediction: Tensor, target) -> Tensor:
    diff = prediction - as_tensor(target, dtype=prediction.dtype)
    return (diff * diff).mean()


def l1_loss(prediction: Tensor, target) -> Tensor:
    return (prediction - as_tensor(target, dtype=prediction.dtype)).abs().mean()

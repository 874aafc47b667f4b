"""Slow, obviously-correct reference implementations the tests compare against."""

import math

import numpy as np

from degflow.autodiff.tensor import Tensor, no_grad
from degflow.resample import kernel

FD_STEP = 1e-3


def check_gradients(fn, *arrays, h=FD_STEP, rtol=1e-4, atol=1e-7, seed=0):
    """Compares the tape gradient of ``sum(fn(*inputs) * w)`` for a random
    ``w`` with central finite differences, input by input, in float64."""
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    out = fn(*tensors)
    w = np.random.default_rng(seed).standard_normal(out.shape)
    (out * w).sum().backward()

    def value(inputs):
        with no_grad():
            return float(np.sum(fn(*[Tensor(x) for x in inputs]).data * w))

    for i, a in enumerate(arrays):
        numeric = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            plus = [x.copy() for x in arrays]
            minus = [x.copy() for x in arrays]
            plus[i][idx] += h
            minus[i][idx] -= h
            numeric[idx] = (value(plus) - value(minus)) / (2 * h)
        analytic = tensors[i].grad
        assert analytic is not None, f"no gradient reached input {i}"
        np.testing.assert_allclose(analytic, numeric, rtol=rtol, atol=atol)


def away_from_zero(rng: np.random.Generator, shape, low=0.2, high=1.5):
    """Random values with |v| in [low, high], so kinks at zero are avoided."""
    magnitude = rng.uniform(low, high, size=shape)
    return magnitude * rng.choice([-1.0, 1.0], size=shape)


def naive_dft2(x: np.ndarray) -> np.ndarray:
    """Unnormalized 2D DFT of an (H, W) plane by explicit sums."""
    h, w = x.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for u in range(h):
        for v in range(w):
            total = 0j
            for y in range(h):
                for z in range(w):
                    total += x[y, z] * np.exp(-2j * np.pi * (u * y / h + v * z / w))
            out[u, v] = total
    return out


def naive_conv2d(x, weight, bias=None, stride=1, padding=0):
    n, c, h, w = x.shape
    o, _, kh, kw = weight.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((n, o, ho, wo))
    for b in range(n):
        for k in range(o):
            for i in range(ho):
                for j in range(wo):
                    window = xp[b, :, i * stride : i * stride + kh, j * stride :]
                    out[b, k, i, j] = np.sum(window[:, :, :kw] * weight[k])
            if bias is not None:
                out[b, k] += bias[k]
    return out


def naive_resize_axis(line: np.ndarray, out_size: int, filter) -> np.ndarray:
    """Resamples a 1-D signal with explicit loops over taps."""
    fn, support = kernel(filter)
    in_size = line.shape[0]
    scale = in_size / out_size
    stretch = max(scale, 1.0)
    out = np.zeros(out_size)
    for i in range(out_size):
        center = (i + 0.5) * scale - 0.5
        lo = math.floor(center - support * stretch)
        hi = math.ceil(center + support * stretch)
        total, weight_sum = 0.0, 0.0
        for p in range(lo, hi + 1):
            wt = float(fn(np.array((p - center) / stretch)))
            total += wt * line[min(max(p, 0), in_size - 1)]
            weight_sum += wt
        out[i] = total / weight_sum
    return out


def naive_resize(img: np.ndarray, out_h: int, out_w: int, filter) -> np.ndarray:
    h, w, c = img.shape
    rows = np.zeros((out_h, w, c))
    for x in range(w):
        for ch in range(c):
            rows[:, x, ch] = naive_resize_axis(img[:, x, ch], out_h, filter)
    out = np.zeros((out_h, out_w, c))
    for y in range(out_h):
        for ch in range(c):
            out[y, :, ch] = naive_resize_axis(rows[y, :, ch], out_w, filter)
    return out


def naive_ssim_plane(a: np.ndarray, b: np.ndarray, window: np.ndarray) -> float:
    size = window.shape[0]
    c1, c2 = 0.01**2, 0.03**2
    scores = []
    for i in range(a.shape[0] - size + 1):
        for j in range(a.shape[1] - size + 1):
            pa = a[i : i + size, j : j + size]
            pb = b[i : i + size, j : j + size]
            mu_a, mu_b = np.sum(window * pa), np.sum(window * pb)
            var_a = np.sum(window * (pa - mu_a) ** 2)
            var_b = np.sum(window * (pb - mu_b) ** 2)
            cov = np.sum(window * (pa - mu_a) * (pb - mu_b))
            num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
            den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
            scores.append(num / den)
    return float(np.mean(scores))

#!/usr/bin/env python3
"""
Differentiable layers with explicit backward passes

Arrays are float64 numpy tensors, batch first:
- time series: B x T x C
- images:      B x H x W x C
- vectors:     B x N

Every layer caches what its backward pass needs during `forward` and
accumulates parameter gradients into `params.grads` during `backward`.
"""

import math
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from ..core.errors import InvalidInputError, ShapeError

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772
LAYER_NORM_EPS = 1e-5


class LayerParams:
    """Named parameter tensors with same-shape gradient accumulators"""

    def __init__(self):
        self.values: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.float64)
        self.values[name] = value
        self.grads[name] = np.zeros_like(value)
        return value

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def zero_grad(self) -> None:
        for g in self.grads.values():
            g.fill(0.0)

    def accumulate(self, name: str, grad: np.ndarray) -> None:
        self.grads[name] += grad


def lecun_normal(shape: Tuple[int, ...], fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """N(0, 1/fan_in), the initialization SELU networks expect"""
    return rng.normal(0.0, math.sqrt(1.0 / fan_in), size=shape)


def _as_batch(x: np.ndarray, ndim: int) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == ndim - 1:
        return x[None], True
    if x.ndim != ndim:
        raise ShapeError(f"Expected {ndim - 1}- or {ndim}-d input, got shape {x.shape}")
    return x, False


# ---------------------------
# Dilated causal convolution
# ---------------------------

def _causal_columns(x: np.ndarray, k: int, dilation: int) -> np.ndarray:
    """B x T x C -> B x T x (k*C); column block j holds x[t + j*d - (k-1)*d]"""
    b, t, c = x.shape
    pad = (k - 1) * dilation
    xp = np.concatenate([np.zeros((b, pad, c)), x], axis=1) if pad else x
    return np.concatenate([xp[:, j * dilation:j * dilation + t, :] for j in range(k)], axis=2)


def _conv1d_matrix(kernel: np.ndarray) -> np.ndarray:
    """C_out x C_in x k -> (k*C_in) x C_out"""
    c_out, c_in, k = kernel.shape
    return kernel.transpose(2, 1, 0).reshape(k * c_in, c_out)


def dilated_causal_conv1d(
    x: np.ndarray, kernel: np.ndarray, dilation: int, bias: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    out[t, o] = sum_{i,j} kernel[o, i, j] * x_padded[t + j*d - (k-1)*d, i] (+ bias[o])

    Left zero-padding of (k-1)*d keeps output length equal to input length,
    and out[t] only reads x[<= t].

    Args:
        x: T x C_in or B x T x C_in
        kernel: C_out x C_in x k
        dilation: d >= 1

    Returns:
        T x C_out or B x T x C_out
    """
    if dilation < 1 or kernel.ndim != 3 or kernel.shape[2] < 1:
        raise ShapeError(f"Need dilation >= 1 and a C_out x C_in x k kernel, got d={dilation}, {kernel.shape}")
    xb, squeeze = _as_batch(x, 3)
    c_out, c_in, k = kernel.shape
    if xb.shape[2] != c_in:
        raise ShapeError(f"Input has {xb.shape[2]} channels, kernel expects {c_in}")
    b, t, _ = xb.shape
    cols = _causal_columns(xb, k, dilation).reshape(b * t, k * c_in)
    out = (cols @ _conv1d_matrix(kernel)).reshape(b, t, c_out)
    if bias is not None:
        out = out + bias
    return out[0] if squeeze else out


def dilated_causal_conv1d_backward(
    grad: np.ndarray, x: np.ndarray, kernel: np.ndarray, dilation: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradients of dilated_causal_conv1d

    Returns:
        (d_input, d_kernel, d_bias) shaped like x, kernel and (C_out,)
    """
    xb, squeeze = _as_batch(x, 3)
    gb, _ = _as_batch(grad, 3)
    c_out, c_in, k = kernel.shape
    b, t, _ = xb.shape
    pad = (k - 1) * dilation
    cols = _causal_columns(xb, k, dilation).reshape(b * t, k * c_in)
    g2 = gb.reshape(b * t, c_out)

    d_matrix = cols.T @ g2
    d_kernel = d_matrix.reshape(k, c_in, c_out).transpose(2, 1, 0)
    d_bias = g2.sum(axis=0)

    d_cols = (g2 @ _conv1d_matrix(kernel).T).reshape(b, t, k, c_in)
    d_padded = np.zeros((b, t + pad, c_in))
    for j in range(k):
        d_padded[:, j * dilation:j * dilation + t, :] += d_cols[:, :, j, :]
    dx = d_padded[:, pad:, :]
    return (dx[0] if squeeze else dx), d_kernel, d_bias


# ---------------------------
# Layer normalization
# ---------------------------

def layer_norm(
    x: np.ndarray, gain: np.ndarray, beta: np.ndarray, eps: float = LAYER_NORM_EPS
) -> Tuple[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """
    Normalize over the last (channel) axis, then scale and shift

    Returns:
        (output, cache) where cache = (x_hat, inv_std) for the backward pass
    """
    x = np.asarray(x, dtype=np.float64)
    if gain.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise ShapeError(f"gain/beta must have shape ({x.shape[-1]},)")
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean) * inv_std
    return gain * x_hat + beta, (x_hat, inv_std)


def layer_norm_backward(
    grad: np.ndarray, cache: Tuple[np.ndarray, np.ndarray], gain: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (d_input, d_gain, d_beta)"""
    x_hat, inv_std = cache
    n = x_hat.shape[-1]
    axes = tuple(range(grad.ndim - 1))
    d_gain = (grad * x_hat).sum(axis=axes)
    d_beta = grad.sum(axis=axes)
    d_hat = grad * gain
    dx = (inv_std / n) * (
        n * d_hat
        - d_hat.sum(axis=-1, keepdims=True)
        - x_hat * (d_hat * x_hat).sum(axis=-1, keepdims=True)
    )
    return dx, d_gain, d_beta


# ---------------------------
# Activations / regularization
# ---------------------------

def selu(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def selu_backward(grad: np.ndarray, x: np.ndarray) -> np.ndarray:
    return grad * SELU_LAMBDA * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def dropout_mask(shape: Tuple[int, ...], rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability `rate`, else 1/(1-rate)"""
    if not 0.0 <= rate < 1.0:
        raise InvalidInputError(f"Dropout rate must lie in [0, 1), got {rate}")
    return (rng.random(shape) >= rate) / (1.0 - rate)


def dropout(
    x: np.ndarray, rate: float, rng: Optional[np.random.Generator], training: bool
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Returns:
        (output, mask); mask is None when the op is the identity
    """
    if not 0.0 <= rate < 1.0:
        raise InvalidInputError(f"Dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    if rng is None:
        raise InvalidInputError("Training-mode dropout needs a random generator")
    mask = dropout_mask(x.shape, rate, rng)
    return x * mask, mask


def linear(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Wx + b for x of shape (n,) or (B, n), W of shape (m, n)"""
    x = np.asarray(x, dtype=np.float64)
    if weight.ndim != 2 or x.shape[-1] != weight.shape[1] or bias.shape != (weight.shape[0],):
        raise ShapeError(f"linear: x {x.shape}, W {weight.shape}, b {bias.shape} disagree")
    return x @ weight.T + bias


# ---------------------------
# 2D convolution / pooling
# ---------------------------

def _same_columns(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    b, h, w, c = x.shape
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    return np.concatenate(
        [xp[:, di:di + h, dj:dj + w, :] for di in range(kh) for dj in range(kw)], axis=3
    )


def conv2d_same(x: np.ndarray, kernel: np.ndarray, bias: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Stride-1 zero-padded 2D convolution (odd kernel sizes)

    Args:
        x: B x H x W x C_in
        kernel: C_out x C_in x kh x kw
    """
    c_out, c_in, kh, kw = kernel.shape
    if x.ndim != 4 or x.shape[3] != c_in or kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError(f"conv2d_same: input {x.shape} vs kernel {kernel.shape}")
    b, h, w, _ = x.shape
    cols = _same_columns(x, kh, kw).reshape(b * h * w, kh * kw * c_in)
    out = (cols @ kernel.transpose(2, 3, 1, 0).reshape(kh * kw * c_in, c_out)).reshape(b, h, w, c_out)
    return out + bias if bias is not None else out


def conv2d_same_backward(
    grad: np.ndarray, x: np.ndarray, kernel: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (d_input, d_kernel, d_bias)"""
    c_out, c_in, kh, kw = kernel.shape
    b, h, w, _ = x.shape
    ph, pw = kh // 2, kw // 2
    cols = _same_columns(x, kh, kw).reshape(b * h * w, kh * kw * c_in)
    g2 = grad.reshape(b * h * w, c_out)
    matrix = kernel.transpose(2, 3, 1, 0).reshape(kh * kw * c_in, c_out)

    d_kernel = (cols.T @ g2).reshape(kh, kw, c_in, c_out).transpose(3, 2, 0, 1)
    d_bias = g2.sum(axis=0)
    d_cols = (g2 @ matrix.T).reshape(b, h, w, kh, kw, c_in)
    d_padded = np.zeros((b, h + 2 * ph, w + 2 * pw, c_in))
    for di in range(kh):
        for dj in range(kw):
            d_padded[:, di:di + h, dj:dj + w, :] += d_cols[:, :, :, di, dj, :]
    return d_padded[:, ph:ph + h, pw:pw + w, :], d_kernel, d_bias


def max_pool2d(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    2x2 max pooling, stride 2; odd trailing rows/columns are dropped

    Returns:
        (output B x H//2 x W//2 x C, argmax indices for the backward pass)
    """
    b, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    if h2 == 0 or w2 == 0:
        raise ShapeError(f"max_pool2d needs at least 2x2 input, got {x.shape}")
    blocks = (
        x[:, :2 * h2, :2 * w2, :]
        .reshape(b, h2, 2, w2, 2, c)
        .transpose(0, 1, 3, 5, 2, 4)
        .reshape(b, h2, w2, c, 4)
    )
    idx = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
    return out, idx


def max_pool2d_backward(grad: np.ndarray, idx: np.ndarray, input_shape: Tuple[int, ...]) -> np.ndarray:
    b, h, w, c = input_shape
    h2, w2 = h // 2, w // 2
    d_blocks = np.zeros((b, h2, w2, c, 4))
    np.put_along_axis(d_blocks, idx[..., None], grad[..., None], axis=-1)
    dx = np.zeros(input_shape)
    dx[:, :2 * h2, :2 * w2, :] = (
        d_blocks.reshape(b, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(b, 2 * h2, 2 * w2, c)
    )
    return dx


# ---------------------------
# Layer objects
# ---------------------------

class Layer:
    """Base layer: forward caches, backward returns the input gradient"""

    def __init__(self):
        self.params = LayerParams()

    def forward(self, x: np.ndarray, training: bool = False, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class CausalConv1d(Layer):
    def __init__(self, c_in: int, c_out: int, kernel_size: int, dilation: int, rng: np.random.Generator):
        super().__init__()
        self.dilation = dilation
        self.params.add("kernel", lecun_normal((c_out, c_in, kernel_size), c_in * kernel_size, rng))
        self.params.add("bias", np.zeros(c_out))
        self._x = None

    def forward(self, x, training=False, rng=None):
        self._x = x
        return dilated_causal_conv1d(x, self.params["kernel"], self.dilation, self.params["bias"])

    def backward(self, grad):
        dx, d_kernel, d_bias = dilated_causal_conv1d_backward(grad, self._x, self.params["kernel"], self.dilation)
        self.params.accumulate("kernel", d_kernel)
        self.params.accumulate("bias", d_bias)
        return dx


class LayerNorm(Layer):
    def __init__(self, size: int):
        super().__init__()
        self.params.add("gain", np.ones(size))
        self.params.add("beta", np.zeros(size))
        self._cache = None

    def forward(self, x, training=False, rng=None):
        out, self._cache = layer_norm(x, self.params["gain"], self.params["beta"])
        return out

    def backward(self, grad):
        dx, d_gain, d_beta = layer_norm_backward(grad, self._cache, self.params["gain"])
        self.params.accumulate("gain", d_gain)
        self.params.accumulate("beta", d_beta)
        return dx


class SELU(Layer):
    def __init__(self):
        super().__init__()
        self._x = None

    def forward(self, x, training=False, rng=None):
        self._x = x
        return selu(x)

    def backward(self, grad):
        return selu_backward(grad, self._x)


class Dropout(Layer):
    def __init__(self, rate: float):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise InvalidInputError(f"Dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate
        self._mask = None

    def forward(self, x, training=False, rng=None):
        out, self._mask = dropout(x, self.rate, rng, training)
        return out

    def backward(self, grad):
        return grad if self._mask is None else grad * self._mask


class Linear(Layer):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator, zero_init: bool = False):
        super().__init__()
        weight = np.zeros((n_out, n_in)) if zero_init else lecun_normal((n_out, n_in), n_in, rng)
        self.params.add("weight", weight)
        self.params.add("bias", np.zeros(n_out))
        self._x = None

    def forward(self, x, training=False, rng=None):
        self._x = x
        return linear(x, self.params["weight"], self.params["bias"])

    def backward(self, grad):
        x2 = self._x.reshape(-1, self._x.shape[-1])
        g2 = grad.reshape(-1, grad.shape[-1])
        self.params.accumulate("weight", g2.T @ x2)
        self.params.accumulate("bias", g2.sum(axis=0))
        return grad @ self.params["weight"]


class Conv2dSame(Layer):
    def __init__(self, c_in: int, c_out: int, kernel_size: int, rng: np.random.Generator):
        super().__init__()
        fan_in = c_in * kernel_size * kernel_size
        self.params.add("kernel", lecun_normal((c_out, c_in, kernel_size, kernel_size), fan_in, rng))
        self.params.add("bias", np.zeros(c_out))
        self._x = None

    def forward(self, x, training=False, rng=None):
        self._x = x
        return conv2d_same(x, self.params["kernel"], self.params["bias"])

    def backward(self, grad):
        dx, d_kernel, d_bias = conv2d_same_backward(grad, self._x, self.params["kernel"])
        self.params.accumulate("kernel", d_kernel)
        self.params.accumulate("bias", d_bias)
        return dx


class MaxPool2d(Layer):
    def __init__(self):
        super().__init__()
        self._idx = None
        self._shape = None

    def forward(self, x, training=False, rng=None):
        self._shape = x.shape
        out, self._idx = max_pool2d(x)
        return out

    def backward(self, grad):
        return max_pool2d_backward(grad, self._idx, self._shape)

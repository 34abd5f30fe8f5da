"""
Differentiable layer primitives.

Each ``*_forward`` returns the output and a cache; the matching ``*_backward``
takes the upstream gradient and that cache. Ops keep the dtype of their input,
so the same code runs in float32 for training and in float64 for gradient
checks. Image tensors are (B, C, H, W).
"""

from typing import NamedTuple, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ocpad.errors import ContractViolation


def _sum(a: np.ndarray, axis) -> np.ndarray:
    """Sum accumulated in float64, returned in the input dtype."""
    return a.sum(axis=axis, dtype=np.float64).astype(a.dtype)


def same_padding(size: int, kernel: int, stride: int) -> Tuple[int, int, int]:
    """Output size and (before, after) zero padding for "same" convolution."""
    out = -(-size // stride)
    total = max((out - 1) * stride + kernel - size, 0)
    return out, total // 2, total - total // 2


# Convolution

class ConvCache(NamedTuple):
    input_shape: Tuple[int, ...]
    padded_shape: Tuple[int, ...]
    columns: np.ndarray
    weights: np.ndarray
    stride: int
    top: int
    left: int
    out_hw: Tuple[int, int]


def _columns(padded: np.ndarray, kernel: int, stride: int, out_h: int, out_w: int) -> np.ndarray:
    """im2col: one row per output position, (C, kh, kw) flattened per row."""
    batch, channels = padded.shape[:2]
    view = sliding_window_view(padded, (kernel, kernel), axis=(2, 3))
    view = view[:, :, ::stride, ::stride][:, :, :out_h, :out_w]
    return view.transpose(0, 2, 3, 1, 4, 5).reshape(batch * out_h * out_w, channels * kernel * kernel)


def conv2d_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray, stride: int = 1):
    if x.ndim != 4:
        raise ContractViolation(f"conv expects a (B, C, H, W) input, got shape {x.shape}")
    batch, channels, height, width = x.shape
    out_channels, in_channels, kernel, kernel_w = weights.shape
    if in_channels != channels or kernel != kernel_w or bias.shape != (out_channels,):
        raise ContractViolation(
            f"conv weights {weights.shape} / bias {bias.shape} do not fit input {x.shape}"
        )

    out_h, top, bottom = same_padding(height, kernel, stride)
    out_w, left, right = same_padding(width, kernel, stride)
    padded = np.pad(x, ((0, 0), (0, 0), (top, bottom), (left, right)))
    columns = _columns(padded, kernel, stride, out_h, out_w)

    # (B*h*w, I*k*k) @ (I*k*k, O) -> (B, O, h, w)
    out = columns @ weights.reshape(out_channels, -1).T
    out = out.reshape(batch, out_h, out_w, out_channels).transpose(0, 3, 1, 2) + bias[None, :, None, None]
    cache = ConvCache(x.shape, padded.shape, columns, weights, stride, top, left, (out_h, out_w))
    return np.ascontiguousarray(out, dtype=x.dtype), cache


def conv2d_backward(grad: np.ndarray, cache: ConvCache, input_grad: bool = True):
    """
    Gradients w.r.t. input, weights and bias. The input gradient is None
    when ``input_grad`` is false.
    """
    batch, channels, height, width = cache.input_shape
    out_channels, _, kernel, _ = cache.weights.shape
    out_h, out_w = cache.out_hw
    stride = cache.stride
    dtype = grad.dtype

    rows = grad.transpose(0, 2, 3, 1).reshape(-1, out_channels)
    grad_weights = (rows.T @ cache.columns).reshape(cache.weights.shape).astype(dtype, copy=False)
    grad_bias = _sum(rows, 0)
    if not input_grad:
        return None, grad_weights, grad_bias

    grad_columns = (rows @ cache.weights.reshape(out_channels, -1)).reshape(
        batch, out_h, out_w, channels, kernel, kernel)
    grad_padded = np.zeros(cache.padded_shape, dtype=dtype)
    for kh in range(kernel):
        for kw in range(kernel):
            grad_padded[:, :, kh:kh + stride * out_h:stride, kw:kw + stride * out_w:stride] += \
                grad_columns[..., kh, kw].transpose(0, 3, 1, 2)
    grad_input = grad_padded[:, :, cache.top:cache.top + height, cache.left:cache.left + width]
    return np.ascontiguousarray(grad_input), grad_weights, grad_bias


# Pooling and upsampling

class PoolCache(NamedTuple):
    input_shape: Tuple[int, ...]
    argmax: np.ndarray


def maxpool2_forward(x: np.ndarray):
    """
    2x2 max pooling with ceil semantics; edge windows are truncated.
    Ties resolve to the first position in row-major order.
    """
    batch, channels, height, width = x.shape
    out_h, out_w = -(-height // 2), -(-width // 2)
    padded = np.full((batch, channels, 2 * out_h, 2 * out_w), -np.inf, dtype=x.dtype)
    padded[:, :, :height, :width] = x
    blocks = padded.reshape(batch, channels, out_h, 2, out_w, 2).transpose(0, 1, 2, 4, 3, 5)
    blocks = blocks.reshape(batch, channels, out_h, out_w, 4)
    argmax = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), PoolCache(x.shape, argmax)


def maxpool2_backward(grad: np.ndarray, cache: PoolCache) -> np.ndarray:
    batch, channels, height, width = cache.input_shape
    out_h, out_w = cache.argmax.shape[2:]
    routed = (np.arange(4) == cache.argmax[..., None]) * grad[..., None]
    routed = routed.astype(grad.dtype).reshape(batch, channels, out_h, out_w, 2, 2)
    full = routed.transpose(0, 1, 2, 4, 3, 5).reshape(batch, channels, 2 * out_h, 2 * out_w)
    return np.ascontiguousarray(full[:, :, :height, :width])


def upsample2_forward(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3)


def upsample2_backward(grad: np.ndarray) -> np.ndarray:
    batch, channels, height, width = grad.shape
    return grad.reshape(batch, channels, height // 2, 2, width // 2, 2).sum(axis=(3, 5))


def crop_forward(x: np.ndarray, height: int, width: int) -> np.ndarray:
    return np.ascontiguousarray(x[:, :, :height, :width])


def crop_backward(grad: np.ndarray, input_shape: Tuple[int, ...]) -> np.ndarray:
    full = np.zeros(input_shape, dtype=grad.dtype)
    full[:, :, :grad.shape[2], :grad.shape[3]] = grad
    return full


# Dense

def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    if x.ndim != 2 or weights.ndim != 2 or x.shape[1] != weights.shape[0] or bias.shape != (weights.shape[1],):
        raise ContractViolation(
            f"dense weights {weights.shape} / bias {bias.shape} do not fit input {x.shape}"
        )
    return (x @ weights + bias).astype(x.dtype, copy=False)


def dense_backward(grad: np.ndarray, x: np.ndarray, weights: np.ndarray, input_grad: bool = True):
    grad_weights = x.T @ grad
    grad_bias = _sum(grad, 0)
    grad_input = grad @ weights.T if input_grad else None
    return grad_input, grad_weights, grad_bias


# Activations

def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0).astype(x.dtype, copy=False)


def relu_backward(grad: np.ndarray, x: np.ndarray) -> np.ndarray:
    return grad * (x > 0)


def sigmoid_forward(x: np.ndarray) -> np.ndarray:
    return expit(x)


def sigmoid_backward(grad: np.ndarray, y: np.ndarray) -> np.ndarray:
    return grad * y * (1 - y)

"""
Reconstruction-error losses and the per-sample anomaly score.

All reductions run in float64. Masks are treated as constants in the backward
pass: they are piecewise constant in the reconstruction.
"""

import math
from typing import Tuple

import numpy as np

from ocpad.errors import DataContractError, UsageError
from ocpad.schemas.loss import LossConfig


def pixel_errors(x: np.ndarray, x_rec: np.ndarray) -> np.ndarray:
    """
    Squared errors as a float64 (B, W*H*I) matrix.
    """
    if x.shape != x_rec.shape:
        raise DataContractError(f"shape mismatch: input {x.shape} vs reconstruction {x_rec.shape}")
    if x.ndim < 2 or x.shape[0] < 1:
        raise DataContractError(f"expected a batch of samples, got shape {x.shape}")
    diff = x.astype(np.float64) - x_rec.astype(np.float64)
    return (diff * diff).reshape(x.shape[0], -1)


def nearest_rank_quantile(values: np.ndarray, alpha: float) -> float:
    """
    alpha-quantile by nearest rank: the ceil(alpha * n)-th smallest value.
    """
    if not 0 < alpha <= 1:
        raise UsageError(f"alpha must be in (0, 1], got {alpha}")
    ordered = np.sort(values)
    # Guard against alpha * n landing a hair above an integer.
    rank = min(max(math.ceil(alpha * len(ordered) - 1e-9), 1), len(ordered))
    return float(ordered[rank - 1])


def sample_weights(mses: np.ndarray, alpha: float) -> np.ndarray:
    """Per-sample 0/1 weights of the quantile-masked loss."""
    threshold = nearest_rank_quantile(mses, alpha)
    return (mses <= threshold).astype(np.float64)


def pixel_weights(errors: np.ndarray, c: float) -> np.ndarray:
    """
    Per-pixel 0/1 weights: keep e <= mse + c * std, per sample.
    """
    if c < 0:
        raise UsageError(f"C must be >= 0, got {c}")
    mses = errors.mean(axis=1, keepdims=True)
    stds = np.sqrt(((errors - mses) ** 2).mean(axis=1, keepdims=True))
    weights = (errors <= mses + c * stds).astype(np.float64)
    # A constant error map keeps every pixel even if rounding nudged the mean below it.
    constant = np.ptp(errors, axis=1) == 0
    weights[constant] = 1.0
    return weights


def mse_batch(x: np.ndarray, x_rec: np.ndarray) -> float:
    return float(pixel_errors(x, x_rec).mean(axis=1).mean())


def ishii_wmse_batch(x: np.ndarray, x_rec: np.ndarray, alpha: float) -> float:
    mses = pixel_errors(x, x_rec).mean(axis=1)
    return float((sample_weights(mses, alpha) * mses).mean())


def proposed_wmse_batch(x: np.ndarray, x_rec: np.ndarray, c: float) -> float:
    errors = pixel_errors(x, x_rec)
    # The denominator stays W*H*I even where weights are zero.
    return float((pixel_weights(errors, c) * errors).mean(axis=1).mean())


def loss_weights(errors: np.ndarray, config: LossConfig) -> np.ndarray:
    """
    Weights broadcastable against the (B, P) error matrix.
    """
    if config.kind == "mse":
        return np.ones((errors.shape[0], 1))
    if config.kind == "ishii_wmse":
        return sample_weights(errors.mean(axis=1), config.alpha)[:, None]
    return pixel_weights(errors, config.c)


def loss_and_grad(x: np.ndarray, x_rec: np.ndarray, config: LossConfig) -> Tuple[float, np.ndarray]:
    """
    Batch loss and dL/dx_rec from one pass; the gradient has x_rec's dtype.
    """
    errors = pixel_errors(x, x_rec)
    weights = loss_weights(errors, config)
    value = float((weights * errors).mean(axis=1).mean())
    diff = (x_rec.astype(np.float64) - x.astype(np.float64)).reshape(errors.shape)
    grad = 2.0 * weights * diff / errors.size
    return value, grad.reshape(x_rec.shape).astype(x_rec.dtype)


def batch_loss(x: np.ndarray, x_rec: np.ndarray, config: LossConfig) -> float:
    if config.kind == "mse":
        return mse_batch(x, x_rec)
    if config.kind == "ishii_wmse":
        return ishii_wmse_batch(x, x_rec, config.alpha)
    return proposed_wmse_batch(x, x_rec, config.c)


def loss_backward(x: np.ndarray, x_rec: np.ndarray, config: LossConfig) -> np.ndarray:
    return loss_and_grad(x, x_rec, config)[1]


def sample_score(x: np.ndarray, x_rec: np.ndarray, config: LossConfig) -> float:
    """
    Anomaly score of one sample (higher = more anomalous).
    Accepts (I, H, W) or (1, I, H, W).
    """
    if x.ndim == 3:
        x = x[None]
    if x_rec.ndim == 3:
        x_rec = x_rec[None]
    if x.shape[0] != 1:
        raise DataContractError(f"sample_score takes a single sample, got batch of {x.shape[0]}")
    return batch_loss(x, x_rec, config)

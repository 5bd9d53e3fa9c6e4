#!/usr/bin/env python3
"""
Softmax and cross-entropy
"""

from typing import Tuple, Union

import numpy as np

from ..core.errors import InvalidInputError, ShapeError


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by max subtraction"""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(
    logits: np.ndarray, targets: Union[int, np.ndarray]
) -> Tuple[float, np.ndarray]:
    """
    Mean cross-entropy of softmax(logits) against integer targets

    Args:
        logits: (K,) for one sample or (B, K) for a batch
        targets: class index, or (B,) class indices

    Returns:
        (loss, d_logits) with d_logits = (softmax - one_hot) / B
    """
    logits = np.asarray(logits, dtype=np.float64)
    single = logits.ndim == 1
    z = logits[None] if single else logits
    t = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    if z.ndim != 2 or t.shape != (z.shape[0],):
        raise ShapeError(f"logits {logits.shape} and targets {np.shape(targets)} disagree")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("Non-finite logits")
    if np.any((t < 0) | (t >= z.shape[1])):
        raise InvalidInputError(f"Target outside 0..{z.shape[1] - 1}")
    b = z.shape[0]
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_norm[:, None]
    loss = float(-log_probs[np.arange(b), t].mean())
    grad = np.exp(log_probs)
    grad[np.arange(b), t] -= 1.0
    grad /= b
    return loss, (grad[0] if single else grad)

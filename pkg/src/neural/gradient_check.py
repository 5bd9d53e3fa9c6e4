#!/usr/bin/env python3
"""
Central finite-difference gradient check
"""

from typing import Callable

import numpy as np


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def gradient_check(
    loss_fn: Callable[[], float],
    param: np.ndarray,
    analytic_grad: np.ndarray,
    rng: np.random.Generator,
    coords: int = 100,
    h: float = 1e-4,
) -> float:
    """
    Compare an analytic gradient with central differences on random coordinates

    Args:
        loss_fn: Recomputes the scalar loss from the current contents of `param`
        param: Array perturbed in place (restored afterwards)
        analytic_grad: Gradient of the loss w.r.t. `param`
        rng: Picks the coordinates
        coords: Number of coordinates (all of them when the tensor is smaller)
        h: Step size

    Returns:
        Largest relative error over the checked coordinates
    """
    flat = param.reshape(-1)
    grad_flat = analytic_grad.reshape(-1)
    if flat.size <= coords:
        picks = np.arange(flat.size)
    else:
        picks = rng.choice(flat.size, coords, replace=False)
    worst = 0.0
    for i in picks:
        original = flat[i]
        flat[i] = original + h
        plus = loss_fn()
        flat[i] = original - h
        minus = loss_fn()
        flat[i] = original
        numeric = (plus - minus) / (2 * h)
        worst = max(worst, relative_error(float(grad_flat[i]), numeric))
    return worst

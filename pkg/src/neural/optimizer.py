#!/usr/bin/env python3
"""
Adam optimizer

Bias-corrected Adam with per-parameter moment buffers keyed by parameter
name. Parameters are updated in place.
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..core.errors import ShapeError


@dataclass
class AdamState:
    lr: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def hyperparameters(self) -> Dict[str, float]:
        return {"lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState) -> AdamState:
    """
    One Adam update of every parameter in `params`

    Args:
        params: name -> parameter array (updated in place)
        grads: name -> gradient, same shapes
        state: moments and step counter (updated in place and returned)
    """
    for name, value in params.items():
        if name not in grads or grads[name].shape != value.shape:
            raise ShapeError(f"Gradient for '{name}' missing or shaped differently from {value.shape}")

    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for name, value in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(value)
            state.v[name] = np.zeros_like(value)
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        value -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return state

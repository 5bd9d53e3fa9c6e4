#!/usr/bin/env python3
"""
Shared classifier plumbing: parameter naming, batching, prediction
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import ShapeError
from ..core.tactile_types import NUM_CHANNELS, ClassLabel
from ..dataset.windowing import WindowSample, stack_windows
from ..neural.layers import Layer
from ..neural.losses import softmax

WindowsLike = Union[np.ndarray, Sequence[WindowSample]]


def as_pressures(windows: WindowsLike) -> np.ndarray:
    """B x T_k x 6 array from an array or a list of WindowSample"""
    if isinstance(windows, np.ndarray):
        return windows if windows.ndim == 3 else windows[None]
    return stack_windows(windows)[0]


SCALE_SAMPLE_WINDOWS = 4096


def sample_windows(
    pressures: np.ndarray, rng: Optional[np.random.Generator] = None, limit: int = SCALE_SAMPLE_WINDOWS
) -> np.ndarray:
    """At most `limit` windows drawn without replacement, kept in their original order"""
    if len(pressures) <= limit:
        return pressures
    rng = rng if rng is not None else np.random.default_rng(0)
    return pressures[np.sort(rng.choice(len(pressures), size=limit, replace=False))]


def fit_scale(values: np.ndarray) -> float:
    """Standard deviation of values; 1.0 when degenerate"""
    scale = float(np.std(values)) if values.size else 0.0
    return scale if np.isfinite(scale) and scale > 0 else 1.0


class Classifier:
    """Common interface of the three slip classifiers"""

    kind = ""
    T_k = 0
    training_manifest: Dict

    def check_window_shape(self, pressures: np.ndarray) -> None:
        if pressures.ndim != 3 or pressures.shape[1:] != (self.T_k, NUM_CHANNELS):
            raise ShapeError(f"Expected windows of {self.T_k} x {NUM_CHANNELS}, got {pressures.shape[1:]}")

    def predict_proba(self, windows: WindowsLike, batch_size: int = 1024) -> np.ndarray:
        raise NotImplementedError

    def predict(self, windows: WindowsLike, batch_size: int = 1024) -> np.ndarray:
        """Class indices (0 stable, 1 slip)"""
        return self.predict_proba(windows, batch_size).argmax(axis=1)

    def classify_window(self, pressures: np.ndarray) -> ClassLabel:
        """Label of a single T_k x 6 window"""
        return ClassLabel(int(self.predict(np.asarray(pressures, dtype=np.float64)[None])[0]))


class NeuralClassifier(Classifier):
    """Layer-based classifier trained with backprop"""

    input_scale = 1.0

    def layers(self) -> List[Tuple[str, Layer]]:
        raise NotImplementedError

    def architecture(self) -> Dict:
        raise NotImplementedError

    def prepare(self, pressures: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fit_input_scale(self, pressures: np.ndarray, rng: Optional[np.random.Generator] = None) -> float:
        """Fit input_scale on a random subsample of the training windows"""
        raise NotImplementedError

    def forward(self, pressures: np.ndarray, training: bool = False, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, d_logits: np.ndarray) -> None:
        raise NotImplementedError

    def parameters(self) -> Dict[str, np.ndarray]:
        return {f"{prefix}.{name}": value for prefix, layer in self.layers() for name, value in layer.params.values.items()}

    def gradients(self) -> Dict[str, np.ndarray]:
        return {f"{prefix}.{name}": grad for prefix, layer in self.layers() for name, grad in layer.params.grads.items()}

    def zero_grad(self) -> None:
        for _, layer in self.layers():
            layer.params.zero_grad()

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: value.copy() for name, value in self.parameters().items()}

    def restore(self, snapshot: Dict[str, np.ndarray]) -> None:
        for name, value in self.parameters().items():
            value[...] = snapshot[name]

    def parameter_count(self) -> int:
        return int(sum(v.size for v in self.parameters().values()))

    def predict_proba(self, windows: WindowsLike, batch_size: int = 1024) -> np.ndarray:
        pressures = as_pressures(windows)
        self.check_window_shape(pressures)
        chunks = [
            softmax(self.forward(pressures[i:i + batch_size], training=False))
            for i in range(0, len(pressures), batch_size)
        ]
        return np.concatenate(chunks) if chunks else np.zeros((0, 2))

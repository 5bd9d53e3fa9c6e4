#!/usr/bin/env python3
"""
Frequency-domain CNN baseline

Each window is turned into a 6 x (T_k//2 + 1) spectral image (FFT magnitude
of every mean-removed channel) and classified by two conv/pool stages and
a small fully connected head.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigError
from ..core.tactile_types import NUM_CHANNELS
from ..dataset.windowing import WindowSample
from ..neural.layers import SELU, Conv2dSame, Dropout, Layer, Linear, MaxPool2d
from ..neural.losses import softmax
from .base import NeuralClassifier, fit_scale, sample_windows


def spectral_image(pressures: np.ndarray) -> np.ndarray:
    """
    FFT magnitude of each mean-removed channel

    Args:
        pressures: T_k x 6 or B x T_k x 6

    Returns:
        6 x (T_k//2 + 1) or B x 6 x (T_k//2 + 1)
    """
    x = np.asarray(pressures, dtype=np.float64)
    spectrum = np.abs(np.fft.rfft(x - x.mean(axis=-2, keepdims=True), axis=-2))
    return np.swapaxes(spectrum, -1, -2)


class FreqCnnModel(NeuralClassifier):
    """
    Conv(3x3) -> SELU -> MaxPool -> Conv(3x3) -> SELU -> MaxPool
    -> Linear -> SELU -> Dropout -> Linear
    """

    kind = "freqcnn"

    def __init__(
        self,
        T_k: int = 100,
        conv_channels: Sequence[int] = (16, 32),
        fc_size: int = 64,
        dropout_rate: float = 0.2,
        kernel_size: int = 3,
        seed: int = 0,
        input_scale: float = 1.0,
    ):
        if len(conv_channels) != 2 or min(conv_channels) < 1 or fc_size < 1:
            raise ConfigError(f"Need two conv widths and a positive fc size, got {conv_channels}, {fc_size}")
        self.T_k = T_k
        self.fft_length = T_k
        self.bins = T_k // 2 + 1
        if self.bins // 4 < 1:
            raise ConfigError(f"T_k={T_k} too short for two pooling stages")
        self.conv_channels = tuple(int(c) for c in conv_channels)
        self.fc_size = fc_size
        self.dropout_rate = dropout_rate
        self.kernel_size = kernel_size
        self.input_scale = input_scale
        self.training_manifest: Dict = {}
        rng = np.random.default_rng(seed)

        c1, c2 = self.conv_channels
        self.conv1 = Conv2dSame(1, c1, kernel_size, rng)
        self.conv2 = Conv2dSame(c1, c2, kernel_size, rng)
        self.flat_size = (NUM_CHANNELS // 4) * (self.bins // 4) * c2
        self.fc = Linear(self.flat_size, fc_size, rng)
        self.out = Linear(fc_size, 2, rng, zero_init=True)
        self._features: List[Layer] = [self.conv1, SELU(), MaxPool2d(), self.conv2, SELU(), MaxPool2d()]
        self._head: List[Layer] = [self.fc, SELU(), Dropout(dropout_rate), self.out]
        self._pooled_shape: Tuple[int, ...] = ()

    def layers(self):
        return [("conv1", self.conv1), ("conv2", self.conv2), ("fc", self.fc), ("out", self.out)]

    def architecture(self) -> Dict:
        return {
            "T_k": self.T_k,
            "conv_channels": list(self.conv_channels),
            "fc_size": self.fc_size,
            "dropout_rate": self.dropout_rate,
            "kernel_size": self.kernel_size,
        }

    def prepare(self, pressures: np.ndarray) -> np.ndarray:
        """B x 6 x bins x 1 scaled spectral images"""
        self.check_window_shape(pressures)
        return (spectral_image(pressures) / self.input_scale)[..., None]

    def fit_input_scale(self, pressures: np.ndarray, rng: Optional[np.random.Generator] = None) -> float:
        self.input_scale = fit_scale(spectral_image(sample_windows(pressures, rng)))
        return self.input_scale

    def forward(self, pressures, training=False, rng=None):
        h = self.prepare(pressures)
        for layer in self._features:
            h = layer.forward(h, training, rng)
        self._pooled_shape = h.shape
        h = h.reshape(h.shape[0], -1)
        for layer in self._head:
            h = layer.forward(h, training, rng)
        return h

    def backward(self, d_logits):
        g = d_logits
        for layer in reversed(self._head):
            g = layer.backward(g)
        g = g.reshape(self._pooled_shape)
        for layer in reversed(self._features):
            g = layer.backward(g)


def freq_cnn_forward(
    model: FreqCnnModel, window: WindowSample, mode: str = "infer", rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """Class probabilities [p_stable, p_slip] of one window"""
    if mode not in ("train", "infer"):
        raise ConfigError(f"mode must be 'train' or 'infer', got '{mode}'")
    logits = model.forward(np.asarray(window.pressures, dtype=np.float64)[None], training=(mode == "train"), rng=rng)
    return softmax(logits)[0]

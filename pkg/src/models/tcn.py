#!/usr/bin/env python3
"""
TCN slip classifier

Per level: [DCC -> LayerNorm -> SELU -> Dropout] x 2 plus a residual path
(1x1 convolution when the channel count changes). The FC head reads the
flattened full C x T_k feature map:
FC1 -> SELU -> Dropout -> FC2 -> SELU -> Dropout -> linear -> softmax.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import ConfigError
from ..core.tactile_types import NUM_CHANNELS
from ..dataset.windowing import WindowSample
from ..neural.layers import SELU, CausalConv1d, Dropout, Layer, LayerNorm, Linear
from ..neural.losses import softmax
from .base import NeuralClassifier, fit_scale, sample_windows


@dataclass(frozen=True)
class LevelSpec:
    channels: int
    kernel_size: int
    dilation: int


@dataclass(frozen=True)
class TcnArchitecture:
    T_k: int = 100
    input_channels: int = NUM_CHANNELS
    levels: Tuple[LevelSpec, ...] = ()
    fc_sizes: Tuple[int, int] = (64, 32)
    num_classes: int = 2
    dropout_rate: float = 0.2

    def receptive_field(self) -> int:
        return 1 + sum(2 * (lv.kernel_size - 1) * lv.dilation for lv in self.levels)

    def validate(self) -> None:
        if self.T_k < 1 or self.input_channels < 1 or self.num_classes < 2:
            raise ConfigError("T_k, input_channels must be >= 1 and num_classes >= 2")
        if not self.levels:
            raise ConfigError("TCN needs at least one level")
        for lv in self.levels:
            if lv.channels < 1 or lv.kernel_size < 1 or lv.dilation < 1:
                raise ConfigError(f"Invalid level {lv}")
        dilations = [lv.dilation for lv in self.levels]
        if any(b <= a for a, b in zip(dilations, dilations[1:])):
            raise ConfigError(f"Dilations must strictly increase, got {dilations}")
        if self.receptive_field() < self.T_k:
            raise ConfigError(f"Receptive field {self.receptive_field()} smaller than T_k={self.T_k}")
        if len(self.fc_sizes) != 2 or min(self.fc_sizes) < 1:
            raise ConfigError(f"fc_sizes must be two positive widths, got {self.fc_sizes}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")

    def to_dict(self) -> Dict:
        return {
            "T_k": self.T_k,
            "input_channels": self.input_channels,
            "levels": [[lv.channels, lv.kernel_size, lv.dilation] for lv in self.levels],
            "fc_sizes": list(self.fc_sizes),
            "num_classes": self.num_classes,
            "dropout_rate": self.dropout_rate,
            "receptive_field": self.receptive_field(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "TcnArchitecture":
        return cls(
            T_k=int(data["T_k"]),
            input_channels=int(data["input_channels"]),
            levels=tuple(LevelSpec(int(c), int(k), int(d)) for c, k, d in data["levels"]),
            fc_sizes=tuple(int(s) for s in data["fc_sizes"]),
            num_classes=int(data["num_classes"]),
            dropout_rate=float(data["dropout_rate"]),
        )


def build_tcn_architecture(
    T_k: int = 100,
    channels: int = 32,
    num_levels: int = 6,
    kernel_size: int = 3,
    fc_sizes: Tuple[int, int] = (64, 32),
    dropout_rate: float = 0.2,
) -> TcnArchitecture:
    """Levels with doubling dilations 1, 2, 4, ..."""
    arch = TcnArchitecture(
        T_k=T_k,
        levels=tuple(LevelSpec(channels, kernel_size, 2 ** i) for i in range(num_levels)),
        fc_sizes=tuple(fc_sizes),
        dropout_rate=dropout_rate,
    )
    arch.validate()
    return arch


def tcn_default_architecture(T_k: int = 100) -> TcnArchitecture:
    """6 levels of 32 channels, k=3, dilations 1..32, FC (64, 32); receptive field 253"""
    return build_tcn_architecture(T_k=T_k)


def parameter_count(arch: TcnArchitecture) -> int:
    """Trainable parameters, biases included"""
    total = 0
    c_in = arch.input_channels
    for lv in arch.levels:
        c = lv.channels
        total += c * c_in * lv.kernel_size + c  # conv1
        total += c * c * lv.kernel_size + c  # conv2
        total += 4 * c  # two layer norms
        if c_in != c:
            total += c * c_in + c  # 1x1 residual
        c_in = c
    fc1, fc2 = arch.fc_sizes
    total += fc1 * c_in * arch.T_k + fc1
    total += fc2 * fc1 + fc2
    total += arch.num_classes * fc2 + arch.num_classes
    return total


class TemporalBlock:
    """Two DCC sublayers with a residual connection"""

    def __init__(self, c_in: int, spec: LevelSpec, dropout_rate: float, rng: np.random.Generator):
        self.conv1 = CausalConv1d(c_in, spec.channels, spec.kernel_size, spec.dilation, rng)
        self.norm1 = LayerNorm(spec.channels)
        self.act1 = SELU()
        self.drop1 = Dropout(dropout_rate)
        self.conv2 = CausalConv1d(spec.channels, spec.channels, spec.kernel_size, spec.dilation, rng)
        self.norm2 = LayerNorm(spec.channels)
        self.act2 = SELU()
        self.drop2 = Dropout(dropout_rate)
        self.downsample = CausalConv1d(c_in, spec.channels, 1, 1, rng) if c_in != spec.channels else None
        self._chain: List[Layer] = [
            self.conv1, self.norm1, self.act1, self.drop1,
            self.conv2, self.norm2, self.act2, self.drop2,
        ]

    def layers(self) -> List[Tuple[str, Layer]]:
        named = [("conv1", self.conv1), ("norm1", self.norm1), ("conv2", self.conv2), ("norm2", self.norm2)]
        if self.downsample is not None:
            named.append(("downsample", self.downsample))
        return named

    def forward(self, x: np.ndarray, training: bool, rng: Optional[np.random.Generator]) -> np.ndarray:
        h = x
        for layer in self._chain:
            h = layer.forward(h, training, rng)
        residual = x if self.downsample is None else self.downsample.forward(x)
        return h + residual

    def backward(self, grad: np.ndarray) -> np.ndarray:
        g = grad
        for layer in reversed(self._chain):
            g = layer.backward(g)
        return g + (grad if self.downsample is None else self.downsample.backward(grad))


class TcnModel(NeuralClassifier):
    """TCN classifier over T_k x 6 pressure windows"""

    kind = "tcn"

    def __init__(self, arch: Optional[TcnArchitecture] = None, seed: int = 0, input_scale: float = 1.0):
        self.arch = arch or tcn_default_architecture()
        self.arch.validate()
        self.T_k = self.arch.T_k
        self.input_scale = input_scale
        self.training_manifest: Dict = {}
        rng = np.random.default_rng(seed)

        self.blocks: List[TemporalBlock] = []
        c_in = self.arch.input_channels
        for spec in self.arch.levels:
            self.blocks.append(TemporalBlock(c_in, spec, self.arch.dropout_rate, rng))
            c_in = spec.channels
        self.feature_channels = c_in
        fc1, fc2 = self.arch.fc_sizes
        rate = self.arch.dropout_rate
        self.fc1 = Linear(c_in * self.T_k, fc1, rng)
        self.fc2 = Linear(fc1, fc2, rng)
        self.out = Linear(fc2, self.arch.num_classes, rng, zero_init=True)
        self._head: List[Layer] = [self.fc1, SELU(), Dropout(rate), self.fc2, SELU(), Dropout(rate), self.out]

    def layers(self) -> List[Tuple[str, Layer]]:
        named = []
        for i, block in enumerate(self.blocks):
            named.extend((f"level{i}.{name}", layer) for name, layer in block.layers())
        named.extend([("fc1", self.fc1), ("fc2", self.fc2), ("out", self.out)])
        return named

    def architecture(self) -> Dict:
        return self.arch.to_dict()

    def prepare(self, pressures: np.ndarray) -> np.ndarray:
        """Reference each channel to the oldest frame of its window, then rescale"""
        self.check_window_shape(pressures)
        return (pressures - pressures[:, :1, :]) / self.input_scale

    def fit_input_scale(self, pressures: np.ndarray, rng: Optional[np.random.Generator] = None) -> float:
        sample = sample_windows(pressures, rng)
        self.input_scale = fit_scale(sample - sample[:, :1, :])
        return self.input_scale

    def features(self, x: np.ndarray, training: bool = False, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """B x T_k x C feature map of the conditioned input, before the FC head"""
        h = x
        for block in self.blocks:
            h = block.forward(h, training, rng)
        return h

    def forward(self, pressures, training=False, rng=None):
        h = self.features(self.prepare(pressures), training, rng)
        h = h.reshape(h.shape[0], -1)
        for layer in self._head:
            h = layer.forward(h, training, rng)
        return h

    def backward(self, d_logits):
        g = d_logits
        for layer in reversed(self._head):
            g = layer.backward(g)
        g = g.reshape(g.shape[0], self.T_k, self.feature_channels)
        for block in reversed(self.blocks):
            g = block.backward(g)


def tcn_forward(
    model: TcnModel, window: WindowSample, mode: str = "infer", rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """
    Class probabilities [p_stable, p_slip] of one window

    Args:
        mode: 'train' (dropout active, needs rng) or 'infer'
    """
    if mode not in ("train", "infer"):
        raise ConfigError(f"mode must be 'train' or 'infer', got '{mode}'")
    logits = model.forward(np.asarray(window.pressures, dtype=np.float64)[None], training=(mode == "train"), rng=rng)
    return softmax(logits)[0]

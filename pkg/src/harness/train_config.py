#!/usr/bin/env python3
"""
Training configuration

Loaded from config/train_config.json by the configuration loader.
"""

from dataclasses import asdict, dataclass, fields, replace
from typing import Dict, Tuple

from ..core.errors import ConfigError
from ..core.tactile_types import MAX_WINDOW

MODEL_KINDS = ("tcn", "freqcnn", "psd")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 256
    lr: float = 0.002
    seed: int = 0
    T_k: int = 100
    stride: int = 1
    augment: bool = True
    noise_fraction: float = 0.01
    model_kind: str = "tcn"
    train_fraction: float = 0.8
    val_fraction: float = 0.1
    test_fraction: float = 0.1
    # TCN
    tcn_channels: int = 32
    tcn_levels: int = 6
    tcn_kernel_size: int = 3
    fc_sizes: Tuple[int, int] = (64, 32)
    dropout_rate: float = 0.2
    # frequency CNN
    cnn_channels: Tuple[int, int] = (16, 32)
    cnn_fc_size: int = 64
    # PSD detector
    psd_cutoff: float = 20.0

    def __post_init__(self):
        object.__setattr__(self, "fc_sizes", tuple(int(v) for v in self.fc_sizes))
        object.__setattr__(self, "cnn_channels", tuple(int(v) for v in self.cnn_channels))
        self.validate()

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if not 1 <= self.T_k <= MAX_WINDOW:
            raise ConfigError(f"T_k must lie in 1..{MAX_WINDOW}, got {self.T_k}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        if self.noise_fraction < 0:
            raise ConfigError(f"noise_fraction must be >= 0, got {self.noise_fraction}")
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model_kind must be one of {MODEL_KINDS}, got '{self.model_kind}'")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")

    def with_overrides(self, **overrides) -> "TrainConfig":
        """Copy with the non-None overrides applied (CLI flags)"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["fc_sizes"] = list(self.fc_sizes)
        data["cnn_channels"] = list(self.cnn_channels)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown training config key(s): {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"Invalid training config: {e}") from e

#!/usr/bin/env python3
"""
Simulator configuration

Loaded from config/sim_config.json by the configuration loader; see
docs/guides/sim_config_schema.md for the key reference.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Dict, Tuple

from ..core.errors import ConfigError
from ..core.tactile_types import MAX_WINDOW, NUM_CHANNELS, Surface

DEFAULT_CONTACT_PROFILES: Dict[str, Tuple[float, ...]] = {
    Surface.PLANAR.value: (1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    # point contact over the array center
    Surface.SPHERICAL.value: (0.4, 1.0, 0.4, 0.4, 1.0, 0.4),
    # cylinder axis along x: contact line on one row
    Surface.CYL_X.value: (1.0, 1.0, 1.0, 0.45, 0.45, 0.45),
    # cylinder axis along y: contact band on the middle column
    Surface.CYL_Y.value: (0.65, 1.0, 0.65, 0.65, 1.0, 0.65),
}


@dataclass
class SimConfig:
    seed: int = 7
    sample_rate: float = 100.0
    base_pressure: float = 400.0
    barometer_range: float = 1000.0
    noise_std: float = 10.0
    slip_vibration_band: Tuple[float, float] = (15.0, 45.0)
    vibration_gain: float = 600.0
    gradient_gain: float = 400.0
    texture_wavelength: float = 0.0025
    rotation_radius: float = 0.05
    carrier_depth: float = 0.05
    carrier_freq_hz: Tuple[float, float] = (0.1, 0.5)
    ramp_time: float = 0.1
    lead_in_s: float = 1.0
    slip_segment_s: Tuple[float, float] = (1.0, 3.0)
    pause_segment_s: Tuple[float, float] = (0.5, 2.0)
    contact_profiles: Dict[str, Tuple[float, ...]] = field(
        default_factory=lambda: dict(DEFAULT_CONTACT_PROFILES)
    )
    # corpus size
    corpus_slip_frames: int = 25000
    sequence_duration: float = 10.0
    static_sequences: int = 8

    def __post_init__(self):
        self.slip_vibration_band = tuple(float(v) for v in self.slip_vibration_band)
        self.carrier_freq_hz = tuple(float(v) for v in self.carrier_freq_hz)
        self.slip_segment_s = tuple(float(v) for v in self.slip_segment_s)
        self.pause_segment_s = tuple(float(v) for v in self.pause_segment_s)
        profiles = dict(DEFAULT_CONTACT_PROFILES)
        profiles.update({k: tuple(float(w) for w in v) for k, v in self.contact_profiles.items()})
        self.contact_profiles = profiles
        self.validate()

    def validate(self) -> None:
        f_lo, f_hi = self.slip_vibration_band
        if not (0 < f_lo < f_hi <= self.sample_rate / 2):
            raise ConfigError(
                f"slip_vibration_band must satisfy 0 < f_lo < f_hi <= {self.sample_rate / 2}, got {self.slip_vibration_band}"
            )
        for name in ("base_pressure", "barometer_range", "sample_rate", "texture_wavelength", "rotation_radius"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("noise_std", "vibration_gain", "gradient_gain", "carrier_depth", "ramp_time"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("slip_segment_s", "pause_segment_s", "carrier_freq_hz"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ConfigError(f"{name} must be an increasing positive range, got {(lo, hi)}")
        if self.lead_in_s * self.sample_rate < MAX_WINDOW:
            raise ConfigError(f"lead_in_s must cover at least {MAX_WINDOW} samples")
        for surface in Surface:
            weights = self.contact_profiles.get(surface.value)
            if weights is None or len(weights) != NUM_CHANNELS:
                raise ConfigError(f"contact_profiles['{surface.value}'] needs {NUM_CHANNELS} weights")
            if any(not 0.0 <= w <= 1.0 for w in weights):
                raise ConfigError(f"contact_profiles['{surface.value}'] weights must lie in [0, 1]")
        if self.corpus_slip_frames < 0 or self.static_sequences < 0:
            raise ConfigError("corpus sizes must be non-negative")
        if self.sequence_duration * self.sample_rate < MAX_WINDOW:
            raise ConfigError(f"sequence_duration must cover at least {MAX_WINDOW} samples")

    def contact_weights(self, surface: Surface) -> Tuple[float, ...]:
        return self.contact_profiles[surface.value]

    def to_dict(self) -> Dict:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        data["contact_profiles"] = {k: list(v) for k, v in self.contact_profiles.items()}
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown simulator config key(s): {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid simulator config: {e}") from e

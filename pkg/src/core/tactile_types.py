#!/usr/bin/env python3
"""
Tactile Types - sensor geometry, frames, condition tags and the slip labeling rule

Channel layout of the 2x3 barometer array (row 0 nearest the fingertip base):

    [[0, 1, 2],
     [3, 4, 5]]

x increases along columns, y along rows. Samples arrive at 100 Hz.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InvalidInputError, WindowRangeError

SAMPLE_RATE_HZ = 100.0
SAMPLE_PERIOD_S = 1.0 / SAMPLE_RATE_HZ

# Slip bounds, inclusive
SLIP_SPEED_THRESHOLD = 0.003  # m/s
SLIP_ANGULAR_THRESHOLD = 0.2  # rad/s

MAX_WINDOW = 100


@dataclass(frozen=True)
class SensorGeometry:
    """2x3 barometer array, row-major channel numbering"""

    rows: int = 2
    cols: int = 3

    @property
    def channel_count(self) -> int:
        return self.rows * self.cols

    def cell_index(self, row: int, col: int) -> int:
        """Channel index of (row, col)"""
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise InvalidInputError(f"Cell ({row}, {col}) outside {self.rows}x{self.cols} array")
        return row * self.cols + col

    def cell_of(self, channel: int) -> Tuple[int, int]:
        """Inverse of cell_index"""
        if not 0 <= channel < self.channel_count:
            raise InvalidInputError(f"Channel {channel} outside array")
        return divmod(channel, self.cols)

    def layout(self) -> List[List[int]]:
        return [[self.cell_index(r, c) for c in range(self.cols)] for r in range(self.rows)]

    def positions(self) -> np.ndarray:
        """
        Centered (x, y) coordinate of every channel, in cell units

        Returns:
            channel_count x 2 array
        """
        xs = np.array([c - (self.cols - 1) / 2.0 for r in range(self.rows) for c in range(self.cols)])
        ys = np.array([r - (self.rows - 1) / 2.0 for r in range(self.rows) for c in range(self.cols)])
        return np.stack([xs, ys], axis=1)


GEOMETRY = SensorGeometry()
NUM_CHANNELS = GEOMETRY.channel_count


class ClassLabel(Enum):
    STABLE = 0
    SLIP = 1

    @property
    def text(self) -> str:
        return self.name.lower()

    @classmethod
    def from_text(cls, text: str) -> "ClassLabel":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise InvalidInputError(f"Unknown class label '{text}'")


class Surface(Enum):
    PLANAR = "planar"
    SPHERICAL = "spherical"
    CYL_X = "cyl_x"
    CYL_Y = "cyl_y"


class SlipType(Enum):
    TRANS_PRIMARY = "trans_primary"
    TRANS_OBLIQUE = "trans_oblique"
    ROTATION = "rotation"
    STATIC = "static"


class Direction(Enum):
    N = "N"
    NE = "NE"
    E = "E"
    SE = "SE"
    S = "S"
    SW = "SW"
    W = "W"
    NW = "NW"
    CW = "CW"
    CCW = "CCW"


PRIMARY_DIRECTIONS = (Direction.E, Direction.N, Direction.W, Direction.S)
OBLIQUE_DIRECTIONS = (Direction.NE, Direction.NW, Direction.SW, Direction.SE)
ROTATION_DIRECTIONS = (Direction.CW, Direction.CCW)

_COMPASS_ANGLES = {
    Direction.E: 0.0,
    Direction.NE: 45.0,
    Direction.N: 90.0,
    Direction.NW: 135.0,
    Direction.W: 180.0,
    Direction.SW: 225.0,
    Direction.S: 270.0,
    Direction.SE: 315.0,
}


def direction_vector(direction: Optional[Direction]) -> np.ndarray:
    """Unit vector of a compass direction (E=+x, N=+y); zero for rotations and none"""
    if direction is None or direction not in _COMPASS_ANGLES:
        return np.zeros(2)
    angle = math.radians(_COMPASS_ANGLES[direction])
    return np.array([math.cos(angle), math.sin(angle)])


def rotation_sign(direction: Optional[Direction]) -> float:
    """+1 for CCW, -1 for CW, 0 otherwise"""
    if direction is Direction.CCW:
        return 1.0
    if direction is Direction.CW:
        return -1.0
    return 0.0


def _enum_from_text(enum_cls, text):
    try:
        return enum_cls(text)
    except ValueError:
        raise InvalidInputError(f"Unknown {enum_cls.__name__} '{text}'")


@dataclass(frozen=True)
class ConditionTag:
    """Experimental condition of a recording (one condition-grid cell plus a direction)"""

    surface: Surface
    slip_type: SlipType
    max_speed: float = 0.0
    direction: Optional[Direction] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        allowed = {
            SlipType.STATIC: (None,),
            SlipType.TRANS_PRIMARY: PRIMARY_DIRECTIONS,
            SlipType.TRANS_OBLIQUE: OBLIQUE_DIRECTIONS,
            SlipType.ROTATION: ROTATION_DIRECTIONS,
        }[self.slip_type]
        if self.direction not in allowed:
            raise ConfigError(f"Direction {self.direction} not valid for {self.slip_type.value}")
        if not math.isfinite(self.max_speed) or self.max_speed < 0:
            raise ConfigError(f"max_speed must be finite and >= 0, got {self.max_speed}")
        if self.slip_type is SlipType.STATIC and self.max_speed != 0:
            raise ConfigError("Static condition must have max_speed 0")
        if self.slip_type is not SlipType.STATIC and self.max_speed == 0:
            raise ConfigError(f"{self.slip_type.value} condition needs a positive max_speed")

    @property
    def is_static(self) -> bool:
        return self.slip_type is SlipType.STATIC

    def stratum(self) -> Tuple[str, str, float]:
        """Condition part of the split stratification key"""
        return (self.surface.value, self.slip_type.value, self.max_speed)

    def to_dict(self) -> Dict:
        return {
            "surface": self.surface.value,
            "slip_type": self.slip_type.value,
            "max_speed": self.max_speed,
            "direction": self.direction.value if self.direction else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ConditionTag":
        direction = data.get("direction")
        return cls(
            surface=_enum_from_text(Surface, data["surface"]),
            slip_type=_enum_from_text(SlipType, data["slip_type"]),
            max_speed=float(data.get("max_speed", 0.0)),
            direction=_enum_from_text(Direction, direction) if direction else None,
        )

    @classmethod
    def static(cls, surface: Surface) -> "ConditionTag":
        return cls(surface=surface, slip_type=SlipType.STATIC)


@dataclass(frozen=True)
class TactileFrame:
    """One 100 Hz sample"""

    t: float
    pressure: Tuple[float, ...]
    v_xy: Tuple[float, float] = (0.0, 0.0)
    omega: float = 0.0

    def __post_init__(self):
        if len(self.pressure) != NUM_CHANNELS:
            raise InvalidInputError(f"Expected {NUM_CHANNELS} pressure values, got {len(self.pressure)}")
        if not all(math.isfinite(p) for p in self.pressure):
            raise InvalidInputError(f"Non-finite pressure at t={self.t}")


def label_frame(frame: TactileFrame) -> ClassLabel:
    """
    Label a frame from its ground-truth velocities

    Slip iff |v_xy| >= 3 mm/s or |omega| >= 0.2 rad/s. Pressures are ignored.
    """
    vx, vy = frame.v_xy
    if not (math.isfinite(vx) and math.isfinite(vy) and math.isfinite(frame.omega)):
        raise InvalidInputError(f"Non-finite velocity at t={frame.t}")
    if math.hypot(vx, vy) >= SLIP_SPEED_THRESHOLD or abs(frame.omega) >= SLIP_ANGULAR_THRESHOLD:
        return ClassLabel.SLIP
    return ClassLabel.STABLE


def label_velocities(v_xy: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Vectorized label_frame; returns int8 labels (0 stable, 1 slip)"""
    v_xy = np.asarray(v_xy, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    if not (np.all(np.isfinite(v_xy)) and np.all(np.isfinite(omega))):
        raise InvalidInputError("Non-finite velocity in trace")
    speed = np.hypot(v_xy[:, 0], v_xy[:, 1])
    slip = (speed >= SLIP_SPEED_THRESHOLD) | (np.abs(omega) >= SLIP_ANGULAR_THRESHOLD)
    return slip.astype(np.int8)


def window_label(labels: Sequence, end_index: int, T_k: int) -> ClassLabel:
    """A window is labeled by its newest frame"""
    if T_k < 1:
        raise WindowRangeError(f"T_k must be >= 1, got {T_k}")
    if end_index < T_k - 1:
        raise WindowRangeError(f"Window of {T_k} ending at {end_index} starts before the sequence")
    if end_index >= len(labels):
        raise WindowRangeError(f"Window end {end_index} beyond sequence of {len(labels)} frames")
    value = labels[end_index]
    return value if isinstance(value, ClassLabel) else ClassLabel(int(value))


def slip_onsets(labels: np.ndarray) -> np.ndarray:
    """Indices i with labels[i-1] stable and labels[i] slip"""
    labels = np.asarray(labels)
    return np.flatnonzero((labels[1:] == 1) & (labels[:-1] == 0)) + 1


def slip_offsets(labels: np.ndarray) -> np.ndarray:
    """Indices i with labels[i-1] slip and labels[i] stable"""
    labels = np.asarray(labels)
    return np.flatnonzero((labels[1:] == 0) & (labels[:-1] == 1)) + 1


@dataclass
class LabeledSequence:
    """
    A contiguous recording, stored column-wise

    Attributes:
        t: L timestamps (s)
        pressure: L x 6 raw barometer values
        velocity: L x 2 ground-truth fingertip velocity (m/s)
        omega: L ground-truth rotational velocity (rad/s)
        labels: L int8 labels (0 stable, 1 slip)
        condition: condition tag of the recording
        barometer_range: full-scale span in raw units
    """

    t: np.ndarray
    pressure: np.ndarray
    velocity: np.ndarray
    omega: np.ndarray
    labels: np.ndarray
    condition: ConditionTag
    barometer_range: float
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = len(self.t)
        if self.pressure.shape != (n, NUM_CHANNELS):
            raise InvalidInputError(f"pressure must be {n}x{NUM_CHANNELS}, got {self.pressure.shape}")
        if self.velocity.shape != (n, 2) or self.omega.shape != (n,) or self.labels.shape != (n,):
            raise InvalidInputError("velocity/omega/labels length must match frame count")
        if not np.all(np.isfinite(self.pressure)):
            raise InvalidInputError("Non-finite pressure in sequence")

    def __len__(self) -> int:
        return len(self.t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledSequence):
            return NotImplemented
        return (
            self.condition == other.condition
            and self.barometer_range == other.barometer_range
            and all(
                np.array_equal(a, b)
                for a, b in (
                    (self.t, other.t),
                    (self.pressure, other.pressure),
                    (self.velocity, other.velocity),
                    (self.omega, other.omega),
                    (self.labels, other.labels),
                )
            )
        )

    def frame(self, i: int) -> TactileFrame:
        return TactileFrame(
            t=float(self.t[i]),
            pressure=tuple(float(p) for p in self.pressure[i]),
            v_xy=(float(self.velocity[i, 0]), float(self.velocity[i, 1])),
            omega=float(self.omega[i]),
        )

    @property
    def frames(self) -> Iterator[TactileFrame]:
        return (self.frame(i) for i in range(len(self)))

    def class_labels(self) -> List[ClassLabel]:
        return [ClassLabel(int(v)) for v in self.labels]

    def slip_frame_count(self) -> int:
        return int(np.count_nonzero(self.labels))

    def labels_consistent(self) -> bool:
        """True iff every stored label equals the rule applied to its velocities"""
        return bool(np.array_equal(self.labels, label_velocities(self.velocity, self.omega)))

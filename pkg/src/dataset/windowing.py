#!/usr/bin/env python3
"""
Windowing - cut labeled sequences into fixed-length network inputs
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from ..core.errors import InvalidInputError, WindowRangeError
from ..core.tactile_types import NUM_CHANNELS, ClassLabel, ConditionTag, LabeledSequence, window_label


@dataclass
class WindowSample:
    """
    T_k x 6 pressure matrix (oldest row first) with one label

    `pressures` may be a read-only view into its source sequence.
    """

    pressures: np.ndarray
    label: ClassLabel
    condition: ConditionTag

    def __post_init__(self):
        if self.pressures.ndim != 2 or self.pressures.shape[1] != NUM_CHANNELS or self.pressures.shape[0] < 1:
            raise InvalidInputError(f"Window must be T_k x {NUM_CHANNELS}, got {self.pressures.shape}")

    @property
    def length(self) -> int:
        return self.pressures.shape[0]

    def stratum(self) -> Tuple:
        """Split key: (label, surface, slip_type, max_speed)"""
        return (self.label.value,) + self.condition.stratum()

    def __eq__(self, other) -> bool:
        if not isinstance(other, WindowSample):
            return NotImplemented
        return (
            self.label == other.label
            and self.condition == other.condition
            and np.array_equal(self.pressures, other.pressures)
        )


def make_windows(seq: LabeledSequence, T_k: int, stride: int = 1) -> List[WindowSample]:
    """
    Slide a T_k window over a sequence

    Windows end at T_k-1, T_k-1+stride, ...; each takes the label of its newest frame.

    Args:
        seq: Labeled sequence
        T_k: Window length in frames
        stride: Step between window ends

    Returns:
        floor((L - T_k) / stride) + 1 windows
    """
    if stride < 1:
        raise WindowRangeError(f"stride must be >= 1, got {stride}")
    if T_k < 1 or len(seq) < T_k:
        raise WindowRangeError(f"Sequence of {len(seq)} frames shorter than window {T_k}")
    # (L - T_k + 1) x 6 x T_k views
    views = np.lib.stride_tricks.sliding_window_view(seq.pressure, T_k, axis=0)
    windows = []
    for end in range(T_k - 1, len(seq), stride):
        windows.append(
            WindowSample(
                pressures=views[end - T_k + 1].T,
                label=window_label(seq.labels, end, T_k),
                condition=seq.condition,
            )
        )
    return windows


def windows_from_corpus(corpus: Iterable[LabeledSequence], T_k: int, stride: int = 1) -> List[WindowSample]:
    """make_windows over every sequence long enough for T_k"""
    windows: List[WindowSample] = []
    for seq in corpus:
        if len(seq) >= T_k:
            windows.extend(make_windows(seq, T_k, stride))
    return windows


def stack_windows(windows: Sequence[WindowSample]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batch windows for the models

    Returns:
        (pressures B x T_k x 6 float64, labels B int64)
    """
    if len(windows) == 0:
        raise InvalidInputError("No windows to stack")
    pressures = np.stack([w.pressures for w in windows]).astype(np.float64, copy=False)
    labels = np.fromiter((w.label.value for w in windows), dtype=np.int64, count=len(windows))
    return pressures, labels


def window_labels(windows: Sequence[WindowSample]) -> np.ndarray:
    return np.fromiter((w.label.value for w in windows), dtype=np.int64, count=len(windows))

#!/usr/bin/env python3
"""
PSD-threshold slip detector

Feature: total periodogram power above a cutoff frequency, summed over the
six channels. One threshold, fit to maximize weighted F1 on training
windows; a window is slip when its feature reaches the threshold.
"""

import logging
from dataclasses import dataclass, field
from typing import ClassVar, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from ..core.errors import FitError, InvalidInputError
from ..core.tactile_types import SAMPLE_RATE_HZ
from ..dataset.windowing import WindowSample
from .base import Classifier, WindowsLike, as_pressures

logger = logging.getLogger(__name__)


def psd_feature_batch(pressures: np.ndarray, cutoff: float, sample_rate: float = SAMPLE_RATE_HZ) -> np.ndarray:
    """
    High-band power of a B x T_k x 6 batch

    Periodogram with a rectangular window, mean removal and 'spectrum'
    scaling; bins at or above `cutoff` are summed over all channels.
    """
    if not 0 < cutoff < sample_rate / 2:
        raise InvalidInputError(f"cutoff must lie in (0, {sample_rate / 2}), got {cutoff}")
    freqs, power = signal.periodogram(
        pressures, fs=sample_rate, window="boxcar", detrend="constant", scaling="spectrum", axis=1
    )
    return power[:, freqs >= cutoff, :].sum(axis=(1, 2))


def psd_features(
    window: Union[WindowSample, np.ndarray], cutoff: float = 20.0, sample_rate: float = SAMPLE_RATE_HZ
) -> float:
    """High-band power of one window"""
    pressures = window.pressures if isinstance(window, WindowSample) else np.asarray(window, dtype=np.float64)
    return float(psd_feature_batch(pressures[None], cutoff, sample_rate)[0])


def welch_band_power(
    x: np.ndarray, band: Tuple[float, float], sample_rate: float = SAMPLE_RATE_HZ, nperseg: int = 64
) -> float:
    """
    Welch-estimated power inside `band`, averaged over channels

    Args:
        x: L or L x C samples
        band: (low, high) in Hz, inclusive
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    freqs, density = signal.welch(x, fs=sample_rate, nperseg=min(nperseg, len(x)), axis=0)
    mask = (freqs >= band[0]) & (freqs <= band[1])
    df = freqs[1] - freqs[0] if len(freqs) > 1 else 1.0
    return float(density[mask].sum(axis=0).mean() * df)


def weighted_f1_sweep(features: np.ndarray, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted F1 of the rule 'slip iff feature >= theta' for every useful theta

    Candidates are the smallest feature value (everything slip) and the
    float just above each distinct value except the largest; a threshold
    rejecting every training window is never a candidate.

    Returns:
        (thresholds ascending, weighted F1 per threshold)
    """
    order = np.argsort(features, kind="stable")
    f_sorted = features[order]
    y_sorted = labels[order].astype(np.int64)
    values = np.unique(f_sorted)
    thresholds = np.concatenate([[values[0]], np.nextafter(values[:-1], np.inf)])
    # number of windows predicted stable for each threshold
    cuts = np.concatenate([[0], np.searchsorted(f_sorted, values[:-1], side="right")])

    cum_slip = np.concatenate([[0], np.cumsum(y_sorted)])
    cum_stable = np.concatenate([[0], np.cumsum(1 - y_sorted)])
    n_slip = cum_slip[-1]
    n_stable = cum_stable[-1]
    fn = cum_slip[cuts]
    tn = cum_stable[cuts]
    tp = n_slip - fn
    fp = n_stable - tn

    with np.errstate(divide="ignore", invalid="ignore"):
        f1_slip = np.where(2 * tp + fp + fn > 0, 2 * tp / (2 * tp + fp + fn), 0.0)
        f1_stable = np.where(2 * tn + fn + fp > 0, 2 * tn / (2 * tn + fn + fp), 0.0)
    weighted = (n_slip * f1_slip + n_stable * f1_stable) / len(features)
    return thresholds, weighted


@dataclass
class PsdDetector(Classifier):
    """Threshold on psd_features; predict slip iff feature >= threshold"""

    kind: ClassVar[str] = "psd"

    threshold: float = 0.0
    cutoff_frequency: float = 20.0
    T_k: int = 100
    sample_rate: float = SAMPLE_RATE_HZ
    train_f1: float = 0.0
    training_manifest: Dict = field(default_factory=dict, compare=False)

    def features(self, windows: WindowsLike) -> np.ndarray:
        pressures = as_pressures(windows)
        self.check_window_shape(pressures)
        return psd_feature_batch(pressures, self.cutoff_frequency, self.sample_rate)

    def predict(self, windows: WindowsLike, batch_size: int = 1024) -> np.ndarray:
        return (self.features(windows) >= self.threshold).astype(np.int64)

    def predict_proba(self, windows: WindowsLike, batch_size: int = 1024) -> np.ndarray:
        """Hard 0/1 probabilities from the threshold rule"""
        slip = self.predict(windows).astype(np.float64)
        return np.stack([1.0 - slip, slip], axis=1)

    def architecture(self) -> Dict:
        return {
            "T_k": self.T_k,
            "cutoff_frequency": self.cutoff_frequency,
            "sample_rate": self.sample_rate,
            "threshold": self.threshold,
            "train_f1": self.train_f1,
        }

    @classmethod
    def from_architecture(cls, data: Dict) -> "PsdDetector":
        return cls(
            threshold=float(data["threshold"]),
            cutoff_frequency=float(data["cutoff_frequency"]),
            T_k=int(data["T_k"]),
            sample_rate=float(data["sample_rate"]),
            train_f1=float(data.get("train_f1", 0.0)),
        )


def psd_fit_threshold(
    windows: Union[Sequence[WindowSample], np.ndarray],
    labels: Optional[np.ndarray] = None,
    cutoff: float = 20.0,
    sample_rate: float = SAMPLE_RATE_HZ,
) -> PsdDetector:
    """
    Fit the threshold maximizing weighted F1; ties go to the smallest threshold

    Args:
        windows: WindowSample list, or a B x T_k x 6 array together with `labels`
        labels: class indices when `windows` is an array
    """
    if isinstance(windows, np.ndarray):
        pressures = windows
        if labels is None:
            raise FitError("Labels are required when fitting on a bare array")
        y = np.asarray(labels, dtype=np.int64)
    else:
        if len(windows) == 0:
            raise FitError("No training windows")
        pressures = as_pressures(windows)
        y = np.fromiter((w.label.value for w in windows), dtype=np.int64, count=len(windows))
    if len(pressures) == 0:
        raise FitError("No training windows")
    if np.unique(y).size < 2:
        raise FitError("Training windows hold a single class")

    features = psd_feature_batch(pressures, cutoff, sample_rate)
    thresholds, scores = weighted_f1_sweep(features, y)
    best = int(np.argmax(scores))
    detector = PsdDetector(
        threshold=float(thresholds[best]),
        cutoff_frequency=cutoff,
        T_k=pressures.shape[1],
        sample_rate=sample_rate,
        train_f1=float(scores[best]),
    )
    logger.info(f"✅ PSD threshold {detector.threshold:.6g} (cutoff {cutoff} Hz), train weighted F1 {detector.train_f1:.4f}")
    return detector

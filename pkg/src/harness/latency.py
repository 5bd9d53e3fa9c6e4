#!/usr/bin/env python3
"""
Detection latency

Replays labeled sequences through the two-consecutive event rule and
counts the samples from each ground-truth slip onset to the registration.
Pure inference time per window is measured separately.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.tactile_types import ClassLabel, LabeledSequence
from ..dataset.windowing import make_windows
from ..stream.slip_detector import match_onsets, run_predictions

logger = logging.getLogger(__name__)

# samples-to-detect reported for the physical gripper, printed for reference
REFERENCE_SAMPLES_TO_DETECT = 11.3
REFERENCE_LATENCY_MS = 134.0
REFERENCE_INFERENCE_MS = 21.0


@dataclass
class LatencyReport:
    # samples-to-detect of every detected onset
    latencies: np.ndarray
    onsets: int
    missed: int
    false_events: int
    mean_inference_ms: float = float("nan")
    per_sequence: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def detected(self) -> int:
        return self.onsets - self.missed

    @property
    def mean_samples(self) -> float:
        return float(self.latencies.mean()) if self.latencies.size else float("nan")

    def percentile(self, q: float) -> float:
        return float(np.percentile(self.latencies, q)) if self.latencies.size else float("nan")

    @property
    def missed_fraction(self) -> float:
        return self.missed / self.onsets if self.onsets else 0.0

    def to_row(self) -> dict:
        return {
            "onsets": self.onsets,
            "detected": self.detected,
            "missed": self.missed,
            "false_events": self.false_events,
            "mean_samples": self.mean_samples,
            "median_samples": self.percentile(50),
            "p90_samples": self.percentile(90),
        }

    def summary_text(self, sample_rate: float = 100.0) -> str:
        mean = self.mean_samples
        lines = [
            f"onsets:            {self.onsets}",
            f"detected:          {self.detected}",
            f"missed:            {self.missed} ({self.missed_fraction:.1%})",
            f"false events:      {self.false_events}",
            f"samples to detect: mean {mean:.2f}, median {self.percentile(50):.1f}, p90 {self.percentile(90):.1f}",
            f"accumulation time: {mean * 1000.0 / sample_rate:.1f} ms",
            f"inference / window: {self.mean_inference_ms:.3f} ms",
            f"reference:         {REFERENCE_SAMPLES_TO_DETECT} samples, {REFERENCE_INFERENCE_MS:.0f} ms inference, "
            f"{REFERENCE_LATENCY_MS:.0f} ms end to end",
        ]
        return "\n".join(lines)


def merge_reports(reports: Sequence[LatencyReport]) -> LatencyReport:
    latencies = [r.latencies for r in reports if r.latencies.size]
    timed = [r.mean_inference_ms for r in reports if np.isfinite(r.mean_inference_ms)]
    frames = [r.per_sequence for r in reports if not r.per_sequence.empty]
    return LatencyReport(
        latencies=np.concatenate(latencies) if latencies else np.zeros(0, dtype=np.int64),
        onsets=sum(r.onsets for r in reports),
        missed=sum(r.missed for r in reports),
        false_events=sum(r.false_events for r in reports),
        mean_inference_ms=float(np.mean(timed)) if timed else float("nan"),
        per_sequence=pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(),
    )


def latency_from_events(events, labels: np.ndarray, name: str = "") -> LatencyReport:
    """LatencyReport of one sequence from its registered events"""
    latencies, false_events = match_onsets(events, labels)
    detected = np.asarray([v for v in latencies if v is not None], dtype=np.int64)
    missed = sum(v is None for v in latencies)
    if missed:
        logger.warning(f"⚠️ {name or 'sequence'}: {missed} of {len(latencies)} onsets missed")
    row = {
        "sequence": name,
        "onsets": len(latencies),
        "missed": missed,
        "false_events": false_events,
        "mean_samples": float(detected.mean()) if detected.size else float("nan"),
    }
    return LatencyReport(detected, len(latencies), missed, false_events, per_sequence=pd.DataFrame([row]))


def time_inference(model, windows, limit: int = 50) -> float:
    """Mean wall time (ms) of classifying one window at a time"""
    sample = windows[:limit]
    if not sample:
        return float("nan")
    start = time.perf_counter()
    for w in sample:
        model.predict([w])
    return (time.perf_counter() - start) * 1000.0 / len(sample)


def measure_latency(model, sequences: Sequence[LabeledSequence], timing_windows: int = 50) -> LatencyReport:
    """
    Samples-to-detect per ground-truth onset over a set of sequences

    Predictions are computed in batches; the event rule then runs over the
    per-frame prediction stream exactly as the streaming detector would.

    Args:
        model: classifier with T_k and predict(windows)
        sequences: labeled sequences containing slip onsets
        timing_windows: windows used for the per-window inference timing

    Returns:
        LatencyReport over all sequences
    """
    reports: List[LatencyReport] = []
    timing_pool = []
    for seq in sequences:
        if len(seq) < model.T_k:
            logger.warning(f"⚠️ {seq.name or 'sequence'} shorter than T_k={model.T_k}, skipped")
            continue
        windows = make_windows(seq, model.T_k)
        predicted = model.predict(windows)
        predictions: List[Optional[ClassLabel]] = [None] * (model.T_k - 1)
        predictions.extend(ClassLabel(int(p)) for p in predicted)
        events = run_predictions(predictions, model.T_k, seq.t)
        reports.append(latency_from_events(events, seq.labels, seq.name))
        if len(timing_pool) < timing_windows:
            timing_pool.extend(windows[: timing_windows - len(timing_pool)])

    report = merge_reports(reports)
    report.mean_inference_ms = time_inference(model, timing_pool, timing_windows)
    logger.info(
        f"✅ Latency over {report.onsets} onsets: mean {report.mean_samples:.2f} samples, "
        f"{report.missed} missed, {report.false_events} false events"
    )
    return report

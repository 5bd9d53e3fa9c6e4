#!/usr/bin/env python3
"""
Replay recorded or streamed frames through the slip detector
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, TextIO

import numpy as np
import pandas as pd

from ..core.tactile_types import SAMPLE_PERIOD_S, ClassLabel, TactileFrame
from ..dataset.corpus_store import load_sequence_file, read_frames
from ..harness.latency import LatencyReport, latency_from_events
from .slip_detector import DetectionEvent, SlipStreamDetector

logger = logging.getLogger(__name__)

EVENT_LOG_COLUMNS = ["index", "t", "wall_time", "transition", "status"]


class Pacer:
    """Holds frame i back until start + i * period"""

    def __init__(self, period: float = SAMPLE_PERIOD_S, clock: Callable[[], float] = time.perf_counter,
                 sleep: Callable[[float], None] = time.sleep):
        self.period = period
        self.clock = clock
        self.sleep = sleep
        self._start = None
        self._count = 0

    def wait(self) -> float:
        now = self.clock()
        if self._start is None:
            self._start = now
        else:
            delay = self._start + self._count * self.period - now
            if delay > 0:
                self.sleep(delay)
                now = self.clock()
        self._count += 1
        return now


@dataclass
class ReplayResult:
    event_log: pd.DataFrame
    events: List[DetectionEvent]
    latency: Optional[LatencyReport]
    frames: int


def replay_frames(
    frames: Iterable[TactileFrame],
    model,
    paced: bool = False,
    labels: Optional[np.ndarray] = None,
    on_slip: Optional[Callable[[DetectionEvent], None]] = None,
    name: str = "",
) -> ReplayResult:
    """
    Feed frames through a SlipStreamDetector

    Args:
        frames: frames in time order
        model: classifier with T_k and classify_window
        paced: hold frames to the 100 Hz sample clock instead of max speed
        labels: ground-truth labels; enables the latency entry
        on_slip: response hook for registrations

    Returns:
        ReplayResult with one event-log row per status transition
    """
    detector = SlipStreamDetector(model, on_slip=on_slip)
    pacer = Pacer() if paced else None
    rows = []
    count = 0
    for frame in frames:
        wall = pacer.wait() if pacer else time.perf_counter()
        update = detector.push(frame)
        count += 1
        if update.transition is not None:
            rows.append(
                {
                    "index": update.index,
                    "t": frame.t,
                    "wall_time": wall,
                    "transition": update.transition.value,
                    "status": update.status.value,
                }
            )
    latency = None
    if labels is not None:
        latency = latency_from_events(detector.events, np.asarray(labels)[:count], name)
        if latency.false_events:
            logger.warning(f"⚠️ {latency.false_events} event(s) without a ground-truth onset")
    logger.info(f"✅ Replayed {count} frames: {len(detector.events)} slip event(s)")
    return ReplayResult(pd.DataFrame(rows, columns=EVENT_LOG_COLUMNS), detector.events, latency, count)


def replay(
    path: str,
    model,
    paced: bool = False,
    events_path: Optional[str] = None,
    on_slip: Optional[Callable[[DetectionEvent], None]] = None,
) -> ReplayResult:
    """Replay one corpus record file; writes the event log CSV when events_path is given"""
    seq = load_sequence_file(path)
    result = replay_frames(seq.frames, model, paced=paced, labels=seq.labels, on_slip=on_slip, name=seq.name)
    if events_path:
        write_event_log(result.event_log, events_path)
    return result


def read_frames_from_stdin(stream: TextIO):
    """
    Yield (frame, label or None) from record-format CSV lines

    Blank lines and a header line are skipped; malformed rows raise
    CorpusParseError with the line number.
    """
    for _, frame, label in read_frames(stream):
        yield frame, label


def replay_stream(
    stream: TextIO,
    model,
    paced: bool = False,
    events_path: Optional[str] = None,
    on_slip: Optional[Callable[[DetectionEvent], None]] = None,
) -> ReplayResult:
    """Replay frames arriving on a text stream; labels are used when every row carries one"""
    labels: List[Optional[ClassLabel]] = []

    def frames():
        for frame, label in read_frames_from_stdin(stream):
            labels.append(label)
            yield frame

    result = replay_frames(frames(), model, paced=paced, on_slip=on_slip, name="<stdin>")
    if labels and all(label is not None for label in labels):
        truth = np.asarray([label.value for label in labels], dtype=np.int8)
        result.latency = latency_from_events(result.events, truth, "<stdin>")
    if events_path:
        write_event_log(result.event_log, events_path)
    return result


def write_event_log(event_log: pd.DataFrame, path: str) -> None:
    try:
        event_log.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        logger.error(f"❌ Error writing event log {path}: {e}")
        raise
    logger.info(f"✅ Wrote {len(event_log)} transition(s) to {path}")

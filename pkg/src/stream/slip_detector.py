#!/usr/bin/env python3
"""
Streaming slip detector

Frames are buffered until T_k are available; from then on every frame
classifies the newest window. Two consecutive slip predictions register a
slip event; a single stable prediction releases it.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import StreamError
from ..core.tactile_types import ClassLabel, TactileFrame, slip_offsets, slip_onsets

logger = logging.getLogger(__name__)

REGISTER_AFTER = 2


class Status(Enum):
    NOMINAL = "nominal"
    SLIP_REGISTERED = "slip_registered"


class Transition(Enum):
    REGISTERED = "registered"
    RELEASED = "released"


@dataclass
class DetectionEvent:
    detect_index: int
    detect_time: float = 0.0
    onset_index: Optional[int] = None
    release_index: Optional[int] = None

    @property
    def closed(self) -> bool:
        return self.release_index is not None

    @property
    def latency_samples(self) -> Optional[int]:
        """Frames from onset to registration, both inclusive"""
        if self.onset_index is None:
            return None
        return self.detect_index - self.onset_index + 1


@dataclass
class StreamState:
    T_k: int
    buffer: Deque[Tuple[float, ...]] = field(default=None)
    counter: int = 0
    status: Status = Status.NOMINAL
    event: Optional[DetectionEvent] = None
    index: int = -1
    last_t: Optional[float] = None

    def __post_init__(self):
        if self.buffer is None:
            self.buffer = deque(maxlen=self.T_k)

    def window(self) -> np.ndarray:
        return np.asarray(self.buffer, dtype=np.float64)


@dataclass(frozen=True)
class StreamUpdate:
    index: int
    prediction: Optional[ClassLabel]
    status: Status
    transition: Optional[Transition] = None
    event: Optional[DetectionEvent] = None


def advance(state: StreamState, prediction: Optional[ClassLabel], t: float = 0.0) -> StreamUpdate:
    """
    Apply one prediction (None during warm-up) to the event state machine

    The caller has already moved state.index to the current frame.
    """
    transition = None
    if prediction is ClassLabel.SLIP:
        state.counter += 1
        if state.status is Status.NOMINAL and state.counter >= REGISTER_AFTER:
            state.status = Status.SLIP_REGISTERED
            state.event = DetectionEvent(detect_index=state.index, detect_time=t)
            transition = Transition.REGISTERED
    elif prediction is ClassLabel.STABLE:
        state.counter = 0
        if state.status is Status.SLIP_REGISTERED:
            state.event.release_index = state.index
            state.status = Status.NOMINAL
            transition = Transition.RELEASED
    event = state.event
    if transition is Transition.RELEASED:
        state.event = None
    return StreamUpdate(state.index, prediction, state.status, transition, event)


def push_frame(state: StreamState, frame: TactileFrame, model) -> Tuple[StreamState, StreamUpdate]:
    """
    Append a frame and, once the buffer is full, classify the newest window

    Args:
        state: stream state (mutated)
        frame: next frame; its timestamp must exceed the previous one
        model: classifier with classify_window(T_k x 6) -> ClassLabel

    Returns:
        (state, update)
    """
    if state.last_t is not None and not frame.t > state.last_t:
        raise StreamError(f"Frame at t={frame.t} does not follow t={state.last_t}")
    state.last_t = frame.t
    state.buffer.append(frame.pressure)
    state.index += 1
    prediction = model.classify_window(state.window()) if len(state.buffer) == state.T_k else None
    return state, advance(state, prediction, frame.t)


def run_predictions(
    predictions: Sequence[Optional[ClassLabel]], T_k: int, t: Optional[np.ndarray] = None
) -> List[DetectionEvent]:
    """Events produced by a per-frame prediction sequence"""
    state = StreamState(T_k)
    events = []
    for i, prediction in enumerate(predictions):
        state.index = i
        update = advance(state, prediction, float(t[i]) if t is not None else 0.0)
        if update.transition is Transition.REGISTERED:
            events.append(update.event)
    return events


def match_onsets(events: Sequence[DetectionEvent], labels: np.ndarray) -> Tuple[List[Optional[int]], int]:
    """
    Pair ground-truth onsets with registered events

    An onset is detected by the first registration in [onset, next offset);
    the event's onset_index is set. Onsets without one are missed (None).

    Returns:
        (latency in samples or None per onset, number of unmatched events)
    """
    labels = np.asarray(labels)
    onsets = slip_onsets(labels)
    offsets = slip_offsets(labels)
    registrations = sorted(events, key=lambda e: e.detect_index)
    matched = set()
    latencies: List[Optional[int]] = []
    for onset in onsets:
        later = offsets[offsets > onset]
        end = int(later[0]) if len(later) else len(labels)
        hit = next(
            (e for e in registrations if onset <= e.detect_index < end and id(e) not in matched),
            None,
        )
        if hit is None:
            latencies.append(None)
            continue
        matched.add(id(hit))
        hit.onset_index = int(onset)
        latencies.append(hit.latency_samples)
    return latencies, len(registrations) - len(matched)


class SlipStreamDetector:
    """
    Stateful wrapper around push_frame

    `on_slip` is the response hook, called with the event on registration;
    `on_release` is called when the status returns to nominal.
    """

    def __init__(
        self,
        model,
        on_slip: Optional[Callable[[DetectionEvent], None]] = None,
        on_release: Optional[Callable[[DetectionEvent], None]] = None,
    ):
        self.model = model
        self.on_slip = on_slip
        self.on_release = on_release
        self.reset()

    def reset(self) -> None:
        self.state = StreamState(self.model.T_k)
        self.events: List[DetectionEvent] = []

    @property
    def status(self) -> Status:
        return self.state.status

    def push(self, frame: TactileFrame) -> StreamUpdate:
        _, update = push_frame(self.state, frame, self.model)
        if update.transition is Transition.REGISTERED:
            self.events.append(update.event)
            logger.debug(f"Slip registered at frame {update.index}")
            if self.on_slip is not None:
                self.on_slip(update.event)
        elif update.transition is Transition.RELEASED:
            logger.debug(f"Slip released at frame {update.index}")
            if self.on_release is not None:
                self.on_release(update.event)
        return update

#!/usr/bin/env python3
"""
Signal Generator - synthetic barometric tactile recordings

Signal model per channel c:

    p_c(t) = base * w_c * F(t)                          normal-force carrier
           + gate(t) * vibration_gain * u(t) * w_c * b_c(t)   band-limited stick-slip vibration
           + gate(t) * gradient_gain * u(t) * (s_c + 0.5 sin(phi(t) - pi/2 * s_c))
           + noise

u(t) is the slip speed (|v|, or |omega| * rotation_radius), gate(t) is 1 on
slip-labeled frames, s_c is the channel's projection on the slip direction
(or a swirl pattern for rotations) and phi(t) advances by one cycle per
texture wavelength travelled. Carrier and gradient terms are zero-mean
across classes, so the classes differ only in their dynamics.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from ..core.errors import ConfigError, GenerationError
from ..core.tactile_types import (
    GEOMETRY,
    MAX_WINDOW,
    OBLIQUE_DIRECTIONS,
    PRIMARY_DIRECTIONS,
    ConditionTag,
    Direction,
    LabeledSequence,
    SlipType,
    Surface,
    direction_vector,
    label_velocities,
    rotation_sign,
)
from .condition_grid import SURFACE_ORDER, default_grid
from .sim_config import SimConfig

logger = logging.getLogger(__name__)

SeedLike = Union[None, int, np.random.SeedSequence]

# x*y of the centered cell positions, scaled to +-1 on the corners
_SWIRL = 2.0 * GEOMETRY.positions()[:, 0] * GEOMETRY.positions()[:, 1]


def _trapezoid(n: int, start: int, end: int, peak: float, ramp_samples: float) -> np.ndarray:
    """Speed profile rising from 0 at `start` and falling back to 0 at `end - 1`"""
    speed = np.zeros(n)
    idx = np.arange(start, end)
    if ramp_samples <= 0:
        speed[idx] = peak
        return speed
    edge = np.minimum(idx - start, end - 1 - idx)
    speed[idx] = peak * np.clip(edge / ramp_samples, 0.0, 1.0)
    return speed


def _slip_segments(cfg: SimConfig, n: int, rng: np.random.Generator) -> List[Tuple[int, int]]:
    """Alternate pauses and slip segments, starting with a lead-in pause"""
    sr = cfg.sample_rate
    segments = []
    pos = int(round((cfg.lead_in_s + rng.uniform(*cfg.pause_segment_s)) * sr))
    while pos < n:
        length = int(round(rng.uniform(*cfg.slip_segment_s) * sr))
        end = min(pos + length, n)
        segments.append((pos, end))
        pos = end + int(round(rng.uniform(*cfg.pause_segment_s) * sr))
    return segments


def _bandpass_sos(cfg: SimConfig) -> np.ndarray:
    f_lo, f_hi = cfg.slip_vibration_band
    nyquist = cfg.sample_rate / 2
    if f_hi >= nyquist:
        return signal.butter(4, f_lo, btype="highpass", fs=cfg.sample_rate, output="sos")
    return signal.butter(4, [f_lo, f_hi], btype="bandpass", fs=cfg.sample_rate, output="sos")


def _synthesize(
    cfg: SimConfig,
    condition: ConditionTag,
    velocity: np.ndarray,
    omega: np.ndarray,
    rng: np.random.Generator,
    name: str = "",
) -> LabeledSequence:
    """Build pressures from a ground-truth motion trace"""
    n = len(omega)
    sr = cfg.sample_rate
    t = np.arange(n) / sr
    labels = label_velocities(velocity, omega)
    gate = labels.astype(np.float64)
    weights = np.asarray(cfg.contact_weights(condition.surface))

    f_carrier = rng.uniform(*cfg.carrier_freq_hz)
    phase0 = rng.uniform(0.0, 2 * math.pi)
    carrier = 1.0 + cfg.carrier_depth * np.sin(2 * math.pi * f_carrier * t + phase0)
    pressure = cfg.base_pressure * carrier[:, None] * weights[None, :]

    if condition.slip_type is SlipType.ROTATION:
        speed = np.abs(omega) * cfg.rotation_radius
        pattern = rotation_sign(condition.direction) * _SWIRL
    else:
        speed = np.hypot(velocity[:, 0], velocity[:, 1])
        pattern = GEOMETRY.positions() @ direction_vector(condition.direction)
    drive = gate * speed

    white = rng.standard_normal((n, GEOMETRY.channel_count))
    band = signal.sosfilt(_bandpass_sos(cfg), white, axis=0)
    band /= np.maximum(band.std(axis=0, keepdims=True), 1e-12)
    pressure += cfg.vibration_gain * drive[:, None] * weights[None, :] * band

    travel_phase = 2 * math.pi * np.cumsum(drive) / sr / cfg.texture_wavelength
    ripple = 0.5 * np.sin(travel_phase[:, None] - 0.5 * math.pi * pattern[None, :])
    pressure += cfg.gradient_gain * drive[:, None] * (pattern[None, :] + ripple)

    pressure += rng.normal(0.0, cfg.noise_std, size=pressure.shape) if cfg.noise_std > 0 else 0.0

    return LabeledSequence(
        t=t,
        pressure=pressure,
        velocity=velocity,
        omega=omega,
        labels=labels,
        condition=condition,
        barometer_range=cfg.barometer_range,
        name=name,
    )


def simulate_sequence(
    cfg: SimConfig,
    condition: ConditionTag,
    duration: float,
    seed: SeedLike = None,
    name: str = "",
) -> LabeledSequence:
    """
    Simulate one labeled recording under a condition

    Args:
        cfg: Simulator configuration
        condition: Condition tag (surface, slip type, speed, direction)
        duration: Length in seconds, at least one maximum window
        seed: Seed or SeedSequence; defaults to cfg.seed

    Returns:
        LabeledSequence with labels recomputed from the velocity trace
    """
    cfg.validate()
    condition.validate()
    n = int(round(duration * cfg.sample_rate))
    if n < MAX_WINDOW:
        raise ConfigError(f"duration {duration}s shorter than {MAX_WINDOW} samples")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)

    velocity = np.zeros((n, 2))
    omega = np.zeros(n)
    if not condition.is_static:
        speed = np.zeros(n)
        ramp = cfg.ramp_time * cfg.sample_rate
        for start, end in _slip_segments(cfg, n, rng):
            speed += _trapezoid(n, start, end, condition.max_speed, ramp)
        if condition.slip_type is SlipType.ROTATION:
            omega = rotation_sign(condition.direction) * speed
        else:
            velocity = speed[:, None] * direction_vector(condition.direction)[None, :]
    return _synthesize(cfg, condition, velocity, omega, rng, name=name)


def simulate_event_sequence(
    cfg: SimConfig,
    kind: str,
    surface: Surface,
    seed: SeedLike = None,
    duration: float = 6.0,
) -> LabeledSequence:
    """
    Replayable stand-ins for the mallet-tap and object-lift trials

    Args:
        kind: 'tap' (short impact-induced slip burst) or 'lift' (slow downward slide)
        surface: Contact surface
        seed: Seed or SeedSequence
        duration: Length in seconds

    Returns:
        LabeledSequence containing exactly one slip episode
    """
    if kind not in ("tap", "lift"):
        raise ConfigError(f"Unknown event kind '{kind}' (expected 'tap' or 'lift')")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    sr = cfg.sample_rate
    n = int(round(duration * sr))
    start = int(round((cfg.lead_in_s + rng.uniform(*cfg.pause_segment_s)) * sr))

    if kind == "tap":
        direction = (PRIMARY_DIRECTIONS + OBLIQUE_DIRECTIONS)[rng.integers(8)]
        peak = rng.uniform(0.03, 0.1)
        length = int(round(rng.uniform(0.1, 0.3) * sr))
        ramp = min(cfg.ramp_time * sr, length / 3.0)
    else:
        direction = Direction.S
        peak = rng.uniform(0.01, 0.05)
        length = int(round(rng.uniform(0.5, 1.5) * sr))
        ramp = cfg.ramp_time * sr
    end = min(start + length, n - 1)
    if end <= start:
        raise ConfigError(f"duration {duration}s too short for a {kind} event")

    slip_type = SlipType.TRANS_PRIMARY if direction in PRIMARY_DIRECTIONS else SlipType.TRANS_OBLIQUE
    condition = ConditionTag(surface=surface, slip_type=slip_type, max_speed=float(peak), direction=direction)
    speed = _trapezoid(n, start, end, peak, ramp)
    velocity = speed[:, None] * direction_vector(direction)[None, :]
    return _synthesize(cfg, condition, velocity, np.zeros(n), rng, name=f"{kind}_{surface.value}")


def _sequence_name(tag: ConditionTag, index: int) -> str:
    direction = tag.direction.value if tag.direction else "none"
    return f"{tag.slip_type.value}_{tag.surface.value}_{tag.max_speed:g}_{direction}_{index}"


def _truncate(seq: LabeledSequence, length: int) -> LabeledSequence:
    return LabeledSequence(
        t=seq.t[:length],
        pressure=seq.pressure[:length],
        velocity=seq.velocity[:length],
        omega=seq.omega[:length],
        labels=seq.labels[:length],
        condition=seq.condition,
        barometer_range=seq.barometer_range,
        name=seq.name,
    )


def generate_corpus(
    cfg: SimConfig,
    grid: Optional[Sequence[Tuple[ConditionTag, float]]] = None,
) -> List[LabeledSequence]:
    """
    Generate a corpus whose slip frames follow the grid fractions

    Each grid entry receives round(fraction * cfg.corpus_slip_frames) slip frames;
    the last sequence of an entry is cut right after its final needed slip frame.
    cfg.static_sequences all-static recordings are appended, cycling over surfaces.

    Args:
        cfg: Simulator configuration (seed, corpus size block)
        grid: (ConditionTag, slip-frame fraction) pairs; defaults to the built-in condition grid

    Returns:
        List of LabeledSequence, bit-identical for the same (cfg, grid)
    """
    grid = list(default_grid() if grid is None else grid)
    total_fraction = sum(f for _, f in grid)
    if abs(total_fraction - 1.0) > 1e-6:
        raise ConfigError(f"Grid fractions must sum to 1, got {total_fraction}")

    logger.info(f"🔄 Generating corpus: {len(grid)} grid cells, {cfg.corpus_slip_frames} slip frames")
    corpus: List[LabeledSequence] = []
    for k, (tag, fraction) in enumerate(grid):
        if fraction < 0:
            raise ConfigError(f"Negative fraction for {tag}")
        target = int(round(fraction * cfg.corpus_slip_frames))
        if target > 0 and tag.is_static:
            raise GenerationError(f"Static condition {tag} cannot supply slip frames")
        got = 0
        j = 0
        while got < target:
            seq = simulate_sequence(
                cfg,
                tag,
                cfg.sequence_duration,
                seed=np.random.SeedSequence([cfg.seed, k, j]),
                name=_sequence_name(tag, j),
            )
            n_slip = seq.slip_frame_count()
            if n_slip == 0:
                raise GenerationError(
                    f"Sequence of {cfg.sequence_duration}s under {tag} holds no slip frames; "
                    "increase sequence_duration"
                )
            need = target - got
            if n_slip > need:
                cut = int(np.searchsorted(np.cumsum(seq.labels), need)) + 1
                seq = _truncate(seq, max(cut, MAX_WINDOW))
                n_slip = seq.slip_frame_count()
            corpus.append(seq)
            got += n_slip
            j += 1

    for s in range(cfg.static_sequences):
        surface = SURFACE_ORDER[s % len(SURFACE_ORDER)]
        tag = ConditionTag.static(surface)
        corpus.append(
            simulate_sequence(
                cfg,
                tag,
                cfg.sequence_duration,
                seed=np.random.SeedSequence([cfg.seed, len(grid), s]),
                name=_sequence_name(tag, s),
            )
        )

    n_frames = sum(len(s) for s in corpus)
    n_slip = sum(s.slip_frame_count() for s in corpus)
    logger.info(f"✅ Generated {len(corpus)} sequences, {n_frames} frames ({n_slip} slip)")
    return corpus


def generate_event_sequences(cfg: SimConfig, count: int, seed: Optional[int] = None) -> List[LabeledSequence]:
    """Alternate tap and lift episodes over the surfaces"""
    base = cfg.seed if seed is None else seed
    sequences = []
    for i in range(count):
        kind = "tap" if i % 2 == 0 else "lift"
        surface = SURFACE_ORDER[(i // 2) % len(SURFACE_ORDER)]
        seq = simulate_event_sequence(cfg, kind, surface, seed=np.random.SeedSequence([base, 7919, i]))
        seq.name = f"{seq.name}_{i}"
        sequences.append(seq)
    return sequences


def slip_frame_shares(corpus: Iterable[LabeledSequence]) -> dict:
    """(slip_type, max_speed, surface) -> share of all slip frames"""
    counts: dict = {}
    for seq in corpus:
        if seq.condition.is_static:
            continue
        key = (seq.condition.slip_type, seq.condition.max_speed, seq.condition.surface)
        counts[key] = counts.get(key, 0) + seq.slip_frame_count()
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()} if total else {}


def stump_accuracy(corpus: Iterable[LabeledSequence], seed: int = 0) -> float:
    """
    Best single-threshold accuracy on per-frame mean pressure, class-balanced

    The majority class is undersampled first, so chance level is 0.5.
    """
    corpus = list(corpus)
    x = np.concatenate([s.pressure.mean(axis=1) for s in corpus])
    y = np.concatenate([s.labels for s in corpus]).astype(np.int64)
    rng = np.random.default_rng(seed)
    idx_stable = np.flatnonzero(y == 0)
    idx_slip = np.flatnonzero(y == 1)
    m = min(len(idx_stable), len(idx_slip))
    if m == 0:
        return 1.0
    keep = np.concatenate([rng.choice(idx_stable, m, replace=False), rng.choice(idx_slip, m, replace=False)])
    x, y = x[keep], y[keep]

    order = np.argsort(x, kind="stable")
    y_sorted = y[order]
    # predict slip above the cut: correct = stable at/below + slip above
    stable_below = np.concatenate([[0], np.cumsum(y_sorted == 0)])
    slip_above = np.concatenate([[0], np.cumsum(y_sorted[::-1] == 1)])[::-1]
    acc = (stable_below + slip_above) / len(y)
    return float(max(acc.max(), (1.0 - acc).max()))

#!/usr/bin/env python3
"""
Splitting and class balancing

stratified_split keeps the per-stratum proportions of train/val/test;
undersample_balance equalizes the classes at the start of every epoch.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Hashable, List, Sequence, Tuple

import numpy as np

from ..core.errors import BalanceError, ConfigError
from .windowing import WindowSample, window_labels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    val_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigError(f"Split fractions must be non-negative and sum to 1, got {fractions}")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split_indices(
    keys: Sequence[Hashable], spec: SplitSpec
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split positions 0..N-1 by stratum

    Strata are visited in sorted key order and shuffled with one generator
    seeded from spec.seed. A stratum too small to give both validation and
    test at least one element (when their fractions are positive) goes
    wholly to train, with a warning.

    Returns:
        (train_idx, val_idx, test_idx), each sorted ascending
    """
    strata: Dict[Hashable, List[int]] = defaultdict(list)
    for i, key in enumerate(keys):
        strata[key].append(i)

    rng = np.random.default_rng(spec.seed)
    train, val, test = [], [], []
    for key in sorted(strata, key=repr):
        members = np.asarray(strata[key])
        members = members[rng.permutation(len(members))]
        n = len(members)
        n_train = _round_half_up(n * spec.train_fraction)
        n_val = _round_half_up(n * spec.val_fraction)
        n_val = min(n_val, n - n_train)
        n_test = n - n_train - n_val
        too_small = (spec.val_fraction > 0 and n_val == 0) or (spec.test_fraction > 0 and n_test == 0)
        if too_small:
            logger.warning(f"⚠️ Stratum {key} has {n} windows, too few to split; assigned to train")
            train.extend(members)
            continue
        train.extend(members[:n_train])
        val.extend(members[n_train:n_train + n_val])
        test.extend(members[n_train + n_val:])
    return (
        np.sort(np.asarray(train, dtype=np.int64)),
        np.sort(np.asarray(val, dtype=np.int64)),
        np.sort(np.asarray(test, dtype=np.int64)),
    )


def stratified_split(
    windows: Sequence[WindowSample], spec: SplitSpec
) -> Tuple[List[WindowSample], List[WindowSample], List[WindowSample]]:
    """
    Stratified train/val/test split on (label, surface, slip_type, max_speed)

    Args:
        windows: Windows to split
        spec: Fractions and seed

    Returns:
        (train, val, test) partitioning the input
    """
    train_idx, val_idx, test_idx = stratified_split_indices([w.stratum() for w in windows], spec)
    return (
        [windows[i] for i in train_idx],
        [windows[i] for i in val_idx],
        [windows[i] for i in test_idx],
    )


def balance_indices(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Undersample the majority class to the minority count

    Returns:
        Shuffled positions into `labels`; every minority position appears once
    """
    labels = np.asarray(labels)
    idx_stable = np.flatnonzero(labels == 0)
    idx_slip = np.flatnonzero(labels == 1)
    if len(idx_stable) == 0 or len(idx_slip) == 0:
        raise BalanceError(
            f"Balancing needs both classes (stable={len(idx_stable)}, slip={len(idx_slip)})"
        )
    m = min(len(idx_stable), len(idx_slip))
    if len(idx_stable) > m:
        idx_stable = rng.choice(idx_stable, m, replace=False)
    if len(idx_slip) > m:
        idx_slip = rng.choice(idx_slip, m, replace=False)
    chosen = np.concatenate([idx_stable, idx_slip])
    return chosen[rng.permutation(len(chosen))]


def epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    """Fresh generator per (seed, epoch)"""
    return np.random.default_rng(np.random.SeedSequence([seed, epoch]))


def undersample_balance(windows: Sequence[WindowSample], seed: int) -> List[WindowSample]:
    """Class-balanced, shuffled subset of windows"""
    idx = balance_indices(window_labels(windows), np.random.default_rng(seed))
    return [windows[i] for i in idx]

#!/usr/bin/env python3
"""
Augmentation - mirror symmetries of the 2x3 array plus sensor noise

The four ops form the Klein four-group: every op is its own inverse and
FlipX o FlipY = Rot180. Labels are never changed; direction metadata is
mirrored with the channels.
"""

from dataclasses import replace
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np

from ..core.errors import InvalidInputError
from ..core.tactile_types import ConditionTag, Direction
from .windowing import WindowSample


class AugmentOp(Enum):
    IDENTITY = "identity"
    FLIP_X = "flip_x"
    FLIP_Y = "flip_y"
    ROT_180 = "rot_180"

    @property
    def permutation(self) -> np.ndarray:
        return _PERMUTATIONS[self]

    def map_direction(self, direction: Optional[Direction]) -> Optional[Direction]:
        if direction is None:
            return None
        return _DIRECTION_MAPS[self].get(direction, direction)


AUGMENT_OPS = (AugmentOp.IDENTITY, AugmentOp.FLIP_X, AugmentOp.FLIP_Y, AugmentOp.ROT_180)

# new[:, c] = old[:, perm[c]] for layout [[0,1,2],[3,4,5]]
_PERMUTATIONS: Dict[AugmentOp, np.ndarray] = {
    AugmentOp.IDENTITY: np.array([0, 1, 2, 3, 4, 5]),
    AugmentOp.FLIP_X: np.array([2, 1, 0, 5, 4, 3]),
    AugmentOp.FLIP_Y: np.array([3, 4, 5, 0, 1, 2]),
    AugmentOp.ROT_180: np.array([5, 4, 3, 2, 1, 0]),
}
PERMUTATION_TABLE = np.stack([_PERMUTATIONS[op] for op in AUGMENT_OPS])

D = Direction
_FLIP_X = {D.E: D.W, D.W: D.E, D.NE: D.NW, D.NW: D.NE, D.SE: D.SW, D.SW: D.SE, D.CW: D.CCW, D.CCW: D.CW}
_FLIP_Y = {D.N: D.S, D.S: D.N, D.NE: D.SE, D.SE: D.NE, D.NW: D.SW, D.SW: D.NW, D.CW: D.CCW, D.CCW: D.CW}
_ROT_180 = {D.N: D.S, D.S: D.N, D.E: D.W, D.W: D.E, D.NE: D.SW, D.SW: D.NE, D.NW: D.SE, D.SE: D.NW}
_DIRECTION_MAPS = {
    AugmentOp.IDENTITY: {},
    AugmentOp.FLIP_X: _FLIP_X,
    AugmentOp.FLIP_Y: _FLIP_Y,
    AugmentOp.ROT_180: _ROT_180,
}


def compose(first: AugmentOp, second: AugmentOp) -> AugmentOp:
    """The op equal to applying `first` then `second`"""
    combined = first.permutation[second.permutation]
    for op in AUGMENT_OPS:
        if np.array_equal(op.permutation, combined):
            return op
    raise InvalidInputError(f"{first} then {second} leaves the group")


def augment(sample: WindowSample, op: AugmentOp) -> WindowSample:
    """Apply a symmetry op to every row and mirror the direction tag"""
    condition: ConditionTag = sample.condition
    if condition.direction is not None:
        condition = replace(condition, direction=op.map_direction(condition.direction))
    return WindowSample(
        pressures=sample.pressures[:, op.permutation],
        label=sample.label,
        condition=condition,
    )


def random_augment_and_noise(
    sample: WindowSample,
    rng: np.random.Generator,
    noise_fraction: float,
    barometer_range: float,
    op: Optional[AugmentOp] = None,
) -> WindowSample:
    """
    Pick one op uniformly (unless forced) and add Gaussian noise

    Noise std is noise_fraction * barometer_range, i.i.d. over every entry.
    """
    if noise_fraction < 0:
        raise InvalidInputError(f"noise_fraction must be >= 0, got {noise_fraction}")
    if op is None:
        op = AUGMENT_OPS[int(rng.integers(len(AUGMENT_OPS)))]
    out = augment(sample, op)
    if noise_fraction > 0:
        out.pressures = out.pressures + rng.normal(0.0, noise_fraction * barometer_range, size=out.pressures.shape)
    return out


def augment_batch(
    pressures: np.ndarray,
    rng: np.random.Generator,
    noise_fraction: float,
    barometer_range: float,
    ops: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Vectorized random_augment_and_noise over a B x T_k x 6 batch

    Args:
        ops: Optional per-sample op indices into AUGMENT_OPS; drawn uniformly when omitted

    Returns:
        New B x T_k x 6 array
    """
    if noise_fraction < 0:
        raise InvalidInputError(f"noise_fraction must be >= 0, got {noise_fraction}")
    b = pressures.shape[0]
    op_idx = rng.integers(len(AUGMENT_OPS), size=b) if ops is None else np.asarray(ops)
    perms = PERMUTATION_TABLE[op_idx][:, None, :]
    out = np.take_along_axis(pressures, np.broadcast_to(perms, pressures.shape), axis=2)
    if noise_fraction > 0:
        out = out + rng.normal(0.0, noise_fraction * barometer_range, size=out.shape)
    return out

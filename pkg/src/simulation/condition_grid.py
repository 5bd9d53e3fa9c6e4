#!/usr/bin/env python3
"""
Condition Grid - distribution of slip data over slip type, speed and surface

Cell values are shares of slip frames. Rows are motions, columns are surfaces;
the marginals are derived from the cells.
"""

from typing import Dict, List, Tuple

import pandas as pd

from ..core.tactile_types import (
    OBLIQUE_DIRECTIONS,
    PRIMARY_DIRECTIONS,
    ROTATION_DIRECTIONS,
    ConditionTag,
    SlipType,
    Surface,
)

SURFACE_ORDER = (Surface.PLANAR, Surface.SPHERICAL, Surface.CYL_Y, Surface.CYL_X)

SURFACE_TITLES = {
    Surface.PLANAR: "Planar",
    Surface.SPHERICAL: "Spherical",
    Surface.CYL_Y: "Cylindrical (y-axis aligned)",
    Surface.CYL_X: "Cylindrical (x-axis aligned)",
}

SLIP_TYPE_TITLES = {
    SlipType.TRANS_PRIMARY: "Translation (Primary Axes)",
    SlipType.TRANS_OBLIQUE: "Translation (Oblique Axes)",
    SlipType.ROTATION: "Rotation",
    SlipType.STATIC: "Static",
}

# (slip_type, max_speed) -> percent per surface in SURFACE_ORDER
TABLE_I_PERCENT: Dict[Tuple[SlipType, float], Tuple[float, float, float, float]] = {
    (SlipType.TRANS_PRIMARY, 0.05): (5.3, 3.7, 3.5, 3.6),
    (SlipType.TRANS_PRIMARY, 0.075): (4.5, 4.7, 3.7, 3.7),
    (SlipType.TRANS_PRIMARY, 0.1): (4.8, 4.7, 3.3, 3.2),
    (SlipType.TRANS_OBLIQUE, 0.05): (4.9, 3.3, 3.3, 3.3),
    (SlipType.TRANS_OBLIQUE, 0.075): (3.5, 4.2, 3.5, 3.4),
    (SlipType.TRANS_OBLIQUE, 0.1): (3.9, 4.2, 3.0, 3.1),
    (SlipType.ROTATION, 1.0): (3.8, 1.2, 1.5, 1.2),
}

DIRECTIONS_BY_TYPE = {
    SlipType.TRANS_PRIMARY: PRIMARY_DIRECTIONS,
    SlipType.TRANS_OBLIQUE: OBLIQUE_DIRECTIONS,
    SlipType.ROTATION: ROTATION_DIRECTIONS,
}


def table_cells() -> List[Tuple[SlipType, float, Surface, float]]:
    """
    Flatten the table into (slip_type, max_speed, surface, fraction)

    Fractions are renormalized so they sum to exactly 1.
    """
    cells = []
    for (slip_type, speed), row in TABLE_I_PERCENT.items():
        for surface, percent in zip(SURFACE_ORDER, row):
            cells.append((slip_type, speed, surface, percent))
    total = sum(c[3] for c in cells)
    return [(st, sp, sf, pct / total) for st, sp, sf, pct in cells]


def default_grid() -> List[Tuple[ConditionTag, float]]:
    """Every table cell split evenly over the directions of its slip type"""
    grid = []
    for slip_type, speed, surface, fraction in table_cells():
        directions = DIRECTIONS_BY_TYPE[slip_type]
        for direction in directions:
            tag = ConditionTag(surface=surface, slip_type=slip_type, max_speed=speed, direction=direction)
            grid.append((tag, fraction / len(directions)))
    return grid


def marginal_shares(cell_shares: Dict[Tuple[SlipType, float, Surface], float]) -> Dict[str, Dict]:
    """
    Row (slip type) and column (surface) sums of a cell-share mapping

    Args:
        cell_shares: (slip_type, max_speed, surface) -> share

    Returns:
        {'slip_type': {SlipType: share}, 'surface': {Surface: share}}
    """
    by_type: Dict[SlipType, float] = {}
    by_surface: Dict[Surface, float] = {}
    for (slip_type, _, surface), share in cell_shares.items():
        by_type[slip_type] = by_type.get(slip_type, 0.0) + share
        by_surface[surface] = by_surface.get(surface, 0.0) + share
    return {"slip_type": by_type, "surface": by_surface}


def shares_table(cell_shares: Dict[Tuple[SlipType, float, Surface], float]) -> pd.DataFrame:
    """Render cell shares in the table layout, with row and column totals"""
    rows = []
    for (slip_type, speed) in TABLE_I_PERCENT:
        row = {"slip_type": SLIP_TYPE_TITLES[slip_type], "max_speed": speed}
        for surface in SURFACE_ORDER:
            row[SURFACE_TITLES[surface]] = cell_shares.get((slip_type, speed, surface), 0.0)
        row["Total"] = sum(row[SURFACE_TITLES[s]] for s in SURFACE_ORDER)
        rows.append(row)
    df = pd.DataFrame(rows)
    totals = {"slip_type": "Total", "max_speed": float("nan")}
    for col in [SURFACE_TITLES[s] for s in SURFACE_ORDER] + ["Total"]:
        totals[col] = df[col].sum()
    return pd.concat([df, pd.DataFrame([totals])], ignore_index=True)

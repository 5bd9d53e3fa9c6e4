#!/usr/bin/env python3
"""
Classification metrics

All summary metrics are class-weighted (each class weighted by its support).
The condition grid breaks weighted F1 down by motion row and surface column,
with pooled marginals.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix, f1_score, precision_recall_fscore_support

from ..core.errors import InvalidInputError
from ..core.tactile_types import ConditionTag, SlipType
from ..dataset.windowing import WindowSample, window_labels
from ..models.base import Classifier
from ..simulation.condition_grid import SLIP_TYPE_TITLES, SURFACE_ORDER, SURFACE_TITLES, TABLE_I_PERCENT

logger = logging.getLogger(__name__)

CURVATURE_AVERAGE = "Average (over curvatures)"
MOTION_AVERAGE = "Average (over motions)"


def weighted_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    return float(f1_score(y_true, y_pred, labels=[0, 1], average="weighted", zero_division=0))


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    # rows: true class, columns: predicted class (stable, slip)
    confusion: np.ndarray
    condition_f1: pd.DataFrame = field(default_factory=pd.DataFrame)

    @property
    def support(self) -> int:
        return int(self.confusion.sum())

    def to_row(self) -> Dict[str, float]:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall, "f1": self.f1}

    def summary_text(self) -> str:
        tn, fp, fn, tp = (int(v) for v in self.confusion.ravel())
        lines = [
            f"windows:   {self.support}",
            f"accuracy:  {self.accuracy:.4f}",
            f"precision: {self.precision:.4f}",
            f"recall:    {self.recall:.4f}",
            f"f1:        {self.f1:.4f}",
            "confusion (rows true, cols predicted; stable, slip):",
            f"  [[{tn}, {fp}],",
            f"   [{fn}, {tp}]]",
        ]
        return "\n".join(lines)


def _condition_grid(y_true: np.ndarray, y_pred: np.ndarray, conditions: Sequence[ConditionTag]) -> pd.DataFrame:
    """Weighted F1 per (motion row, surface) cell; pooled row/column averages; NaN for empty cells"""
    keys = pd.DataFrame(
        {
            "slip_type": [c.slip_type for c in conditions],
            "max_speed": [c.max_speed for c in conditions],
            "surface": [c.surface for c in conditions],
            "y_true": y_true,
            "y_pred": y_pred,
        }
    )
    keys = keys[keys["slip_type"] != SlipType.STATIC]

    def score(frame: pd.DataFrame) -> float:
        return weighted_f1(frame["y_true"].to_numpy(), frame["y_pred"].to_numpy()) if len(frame) else float("nan")

    rows = []
    for slip_type, speed in TABLE_I_PERCENT:
        in_row = keys[(keys["slip_type"] == slip_type) & np.isclose(keys["max_speed"], speed)]
        row = {"slip_type": SLIP_TYPE_TITLES[slip_type], "max_speed": speed}
        for surface in SURFACE_ORDER:
            row[SURFACE_TITLES[surface]] = score(in_row[in_row["surface"] == surface])
        row[CURVATURE_AVERAGE] = score(in_row)
        rows.append(row)
    bottom = {"slip_type": MOTION_AVERAGE, "max_speed": float("nan")}
    for surface in SURFACE_ORDER:
        bottom[SURFACE_TITLES[surface]] = score(keys[keys["surface"] == surface])
    bottom[CURVATURE_AVERAGE] = score(keys)
    rows.append(bottom)
    return pd.DataFrame(rows)


def metrics_from_predictions(
    y_true: np.ndarray, y_pred: np.ndarray, conditions: Optional[Sequence[ConditionTag]] = None
) -> MetricsReport:
    """
    Weighted metrics of predicted against true class indices

    Args:
        y_true: true classes (0 stable, 1 slip)
        y_pred: predicted classes
        conditions: per-window condition tags for the condition grid (optional)
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise InvalidInputError("No windows to evaluate")
    if y_true.shape != y_pred.shape:
        raise InvalidInputError(f"{y_true.shape[0]} labels but {y_pred.shape[0]} predictions")

    confusion = confusion_matrix(y_true, y_pred, labels=[0, 1])
    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=[0, 1], average="weighted", zero_division=0
    )
    grid = _condition_grid(y_true, y_pred, conditions) if conditions is not None else pd.DataFrame()
    return MetricsReport(
        accuracy=float(np.trace(confusion) / confusion.sum()),
        precision=float(precision),
        recall=float(recall),
        f1=float(f1),
        confusion=confusion,
        condition_f1=grid,
    )


def evaluate(model: Classifier, windows: List[WindowSample]) -> MetricsReport:
    """
    Score a model on labeled windows

    Args:
        model: any classifier with predict()
        windows: nonempty list of windows of the model's T_k

    Returns:
        MetricsReport with the condition grid filled in
    """
    if not windows:
        raise InvalidInputError("No windows to evaluate")
    y_pred = model.predict(windows)
    report = metrics_from_predictions(window_labels(windows), y_pred, [w.condition for w in windows])
    logger.info(f"✅ Evaluated {model.kind} on {len(windows)} windows: weighted F1 {report.f1:.4f}")
    return report


def sensitivity_table(report: MetricsReport) -> pd.DataFrame:
    """
    Condition grid in percent, one row per motion and speed

    Empty cells stay NaN.
    """
    if report.condition_f1.empty:
        raise InvalidInputError("Report has no condition grid (evaluate with window conditions)")
    table = report.condition_f1.copy()
    value_columns = [SURFACE_TITLES[s] for s in SURFACE_ORDER] + [CURVATURE_AVERAGE]
    table[value_columns] = (table[value_columns] * 100.0).round(1)
    return table

#!/usr/bin/env python3
"""
Window-size sweep, method comparison and trial success rates
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence

import numpy as np
import pandas as pd

from ..core.errors import InvalidInputError
from ..core.tactile_types import LabeledSequence, slip_offsets
from ..stream.replay import replay_frames
from .latency import time_inference
from .metrics import evaluate
from .train_config import TrainConfig
from .trainer import train

logger = logging.getLogger(__name__)

DEFAULT_SWEEP_SIZES = tuple(range(10, 101, 10))

METHOD_TITLES = {"psd": "PSD threshold", "freqcnn": "Frequency CNN", "tcn": "TCN"}

# weighted accuracy / precision / recall / F1 reported on the physical dataset
REFERENCE_METRICS = {
    "psd": (0.574, 0.579, 0.574, 0.575),
    "freqcnn": (0.860, 0.860, 0.860, 0.860),
    "tcn": (0.913, 0.914, 0.914, 0.914),
}


@dataclass
class SweepResult:
    # T_k, val_f1, test_f1, best_epoch
    table: pd.DataFrame
    # T_k -> mean per-window inference time (ms)
    inference_ms: Dict[int, float] = field(default_factory=dict)

    def summary_text(self) -> str:
        lines = ["T_k  val_f1  test_f1  inference_ms"]
        for row in self.table.itertuples(index=False):
            lines.append(
                f"{row.T_k:>3}  {row.val_f1:.4f}  {row.test_f1:.4f}  {self.inference_ms.get(row.T_k, float('nan')):.3f}"
            )
        return "\n".join(lines)


def window_sweep(
    corpus: Sequence[LabeledSequence],
    cfg: TrainConfig,
    sizes: Iterable[int] = DEFAULT_SWEEP_SIZES,
) -> SweepResult:
    """
    Train one TCN per window size

    Args:
        corpus: sequences at least max(sizes) frames long
        cfg: shared hyperparameters; T_k and model_kind are set per run
        sizes: window sizes to try

    Returns:
        SweepResult with one row per size
    """
    sizes = list(sizes)
    if not sizes:
        raise InvalidInputError("No window sizes to sweep")
    shortest = min(len(seq) for seq in corpus)
    if shortest < max(sizes):
        raise InvalidInputError(f"Shortest sequence has {shortest} frames, sweep needs {max(sizes)}")

    rows = []
    timings = {}
    for size in sizes:
        logger.info(f"🔄 Window sweep: T_k={size}")
        result = train(corpus, cfg.with_overrides(T_k=size, model_kind="tcn"))
        test_f1 = evaluate(result.model, result.splits.test).f1 if result.splits.test else float("nan")
        rows.append({"T_k": size, "val_f1": result.best_val_f1, "test_f1": test_f1, "best_epoch": result.best_epoch})
        timings[size] = time_inference(result.model, result.splits.val or result.splits.train)
    logger.info(f"✅ Window sweep finished over {len(sizes)} sizes")
    return SweepResult(pd.DataFrame(rows), timings)


def compare_methods(
    corpus: Sequence[LabeledSequence],
    cfg: TrainConfig,
    seeds: Sequence[int] = (0, 1, 2),
    kinds: Sequence[str] = ("psd", "freqcnn", "tcn"),
) -> pd.DataFrame:
    """
    Weighted test metrics of each method, averaged over seeds

    The F1 standard deviation across seeds measures prediction variance;
    reference columns carry the values reported on the physical dataset.

    Returns:
        One row per method
    """
    if not seeds:
        raise InvalidInputError("Need at least one seed")
    rows = []
    for kind in kinds:
        per_seed = []
        for seed in seeds:
            logger.info(f"🔄 {METHOD_TITLES[kind]}, seed {seed}")
            result = train(corpus, cfg.with_overrides(model_kind=kind, seed=seed))
            per_seed.append(evaluate(result.model, result.splits.test or result.splits.val).to_row())
        scores = pd.DataFrame(per_seed)
        ref = REFERENCE_METRICS[kind]
        rows.append(
            {
                "method": METHOD_TITLES[kind],
                "accuracy": scores["accuracy"].mean(),
                "precision": scores["precision"].mean(),
                "recall": scores["recall"].mean(),
                "f1": scores["f1"].mean(),
                "f1_std": float(np.std(scores["f1"].to_numpy(), ddof=1)) if len(seeds) > 1 else 0.0,
                "seeds": len(seeds),
                "reference_accuracy": ref[0],
                "reference_precision": ref[1],
                "reference_recall": ref[2],
                "reference_f1": ref[3],
            }
        )
    return pd.DataFrame(rows)


def _trial_succeeded(events, labels: np.ndarray, latency) -> bool:
    """Every onset registered, nothing spurious, and each event released only after its slip stopped"""
    if latency.onsets == 0 or latency.missed or latency.false_events:
        return False
    offsets = slip_offsets(labels)
    for event in events:
        if not event.closed:
            return False
        later = offsets[offsets > event.onset_index]
        if not len(later) or event.release_index < later[0]:
            return False
    return True


def trial_success_table(model, sequences: Sequence[LabeledSequence]) -> pd.DataFrame:
    """
    Success rate of replayed tap and lift trials

    Each sequence is streamed frame by frame through the slip detector. A
    trial succeeds when the slip is registered while the object moves and
    the status is back to nominal once it has stopped.

    Args:
        model: classifier with T_k
        sequences: event sequences named '<kind>_<surface>_<index>'

    Returns:
        One row per (kind, surface): trials, successes, success_rate
    """
    rows = []
    for seq in sequences:
        if len(seq) < model.T_k:
            logger.warning(f"⚠️ {seq.name or 'sequence'} shorter than T_k={model.T_k}, skipped")
            continue
        result = replay_frames(seq.frames, model, labels=seq.labels, name=seq.name)
        rows.append(
            {
                "kind": seq.name.split("_", 1)[0] if seq.name else "unnamed",
                "surface": seq.condition.surface.value,
                "success": _trial_succeeded(result.events, seq.labels, result.latency),
            }
        )
    if not rows:
        raise InvalidInputError("No trial sequence is long enough to replay")

    trials = pd.DataFrame(rows)
    table = (
        trials.groupby(["kind", "surface"], sort=True)["success"]
        .agg(trials="size", successes="sum")
        .reset_index()
    )
    table["successes"] = table["successes"].astype(int)
    table["success_rate"] = table["successes"] / table["trials"]
    total = table["successes"].sum() / table["trials"].sum()
    logger.info(f"✅ {len(trials)} trials replayed, {total:.1%} successful")
    return table

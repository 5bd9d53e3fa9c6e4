#!/usr/bin/env python3
"""
Metrics, training loop, sweeps, latency measurement and report files
"""

import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from openpyxl import load_workbook
from sklearn.metrics import precision_recall_fscore_support

from src.core.errors import BalanceError, FitError, InvalidInputError, TrainingDivergenceError
from src.core.tactile_types import ClassLabel, ConditionTag, Direction, SlipType, Surface
from src.dataset.windowing import windows_from_corpus
from src.harness.latency import LatencyReport, measure_latency, merge_reports, time_inference
from src.harness.metrics import (
    CURVATURE_AVERAGE,
    MOTION_AVERAGE,
    evaluate,
    metrics_from_predictions,
    sensitivity_table,
)
from src.harness.reports import format_percent_table, save_table_to_excel, write_report, write_table
from src.harness.sweep import compare_methods, trial_success_table, window_sweep
from src.harness.train_config import TrainConfig
from src.harness.trainer import DatasetSplits, corpus_fingerprint, prepare_splits, train
from src.models.freq_cnn import FreqCnnModel
from src.models.psd_detector import PsdDetector
from src.models.tcn import TcnModel

from conftest import SLIP_CONDITION, build_sequence


# ---------------------------
# Metrics
# ---------------------------

def test_perfect_predictions():
    report = metrics_from_predictions(np.array([0, 1, 0, 1]), np.array([0, 1, 0, 1]))
    assert (report.accuracy, report.precision, report.recall, report.f1) == (1.0, 1.0, 1.0, 1.0)
    assert report.confusion.tolist() == [[2, 0], [0, 2]]
    assert report.support == 4


def test_always_slip_predictions():
    report = metrics_from_predictions(np.array([0, 0, 1, 1]), np.ones(4, dtype=int))
    assert report.accuracy == pytest.approx(0.5)
    assert report.precision == pytest.approx(0.25)
    assert report.recall == pytest.approx(0.5)
    assert report.f1 == pytest.approx(1.0 / 3.0)
    assert "accuracy:  0.5000" in report.summary_text()


def test_metrics_errors():
    with pytest.raises(InvalidInputError):
        metrics_from_predictions(np.array([]), np.array([]))
    with pytest.raises(InvalidInputError):
        metrics_from_predictions(np.array([0, 1]), np.array([0]))


def test_condition_grid_cells_and_marginals():
    spherical_rotation = ConditionTag(Surface.SPHERICAL, SlipType.ROTATION, 1.0, Direction.CW)
    static = ConditionTag.static(Surface.PLANAR)
    y_true = np.array([1, 0, 1, 0, 1, 0])
    y_pred = np.array([1, 0, 1, 0, 0, 1])
    conditions = [SLIP_CONDITION] * 4 + [spherical_rotation, static]
    report = metrics_from_predictions(y_true, y_pred, conditions)
    grid = report.condition_f1
    assert len(grid) == 8
    first = grid.iloc[0]
    assert first["Planar"] == pytest.approx(1.0)
    assert math.isnan(first["Spherical"])
    rotation = grid[grid["slip_type"] == "Rotation"].iloc[0]
    assert rotation["Spherical"] == pytest.approx(0.0)
    bottom = grid.iloc[-1]
    assert bottom["slip_type"] == MOTION_AVERAGE
    # the static window is left out of the grid
    assert bottom[CURVATURE_AVERAGE] == pytest.approx(metrics_from_predictions(y_true[:5], y_pred[:5]).f1)

    table = sensitivity_table(report)
    assert table.iloc[0]["Planar"] == 100.0
    assert "100.0" in format_percent_table(table)
    with pytest.raises(InvalidInputError):
        sensitivity_table(metrics_from_predictions(y_true, y_pred))


def test_evaluate_uses_window_conditions(toy_corpus, label_oracle):
    for seq in toy_corpus:
        seq.pressure[:, 0] = 1000.0 * seq.labels
    windows = windows_from_corpus(toy_corpus, 8)
    report = evaluate(label_oracle(8), windows)
    assert report.f1 == 1.0
    assert report.condition_f1.iloc[0]["Planar"] == 1.0
    with pytest.raises(InvalidInputError):
        evaluate(label_oracle(8), [])


def test_evaluate_ignores_window_order(toy_corpus, label_oracle):
    for seq in toy_corpus:
        # every fifth frame carries the wrong level, so the oracle makes mistakes
        wrong = np.arange(len(seq)) % 5 == 0
        seq.pressure[:, 0] = 1000.0 * np.where(wrong, 1 - seq.labels, seq.labels)
    windows = windows_from_corpus(toy_corpus, 8)
    report = evaluate(label_oracle(8), windows)
    assert 0.0 < report.f1 < 1.0
    order = np.random.default_rng(3).permutation(len(windows))
    shuffled = evaluate(label_oracle(8), [windows[i] for i in order])
    assert shuffled.to_row() == report.to_row()
    assert np.array_equal(shuffled.confusion, report.confusion)
    pd.testing.assert_frame_equal(shuffled.condition_f1, report.condition_f1)


def test_weighted_metrics_equal_macro_on_balanced_classes():
    y_true = np.array([0] * 5 + [1] * 5)
    y_pred = np.array([0, 0, 0, 1, 1, 1, 1, 1, 1, 0])
    report = metrics_from_predictions(y_true, y_pred)
    precision, recall, f1, _ = precision_recall_fscore_support(y_true, y_pred, average="macro")
    assert report.precision == pytest.approx(precision)
    assert report.recall == pytest.approx(recall)
    assert report.f1 == pytest.approx(f1)


# ---------------------------
# Training
# ---------------------------

def test_separable_corpus_is_fit_completely(toy_corpus, tiny_cfg):
    windows = windows_from_corpus(toy_corpus, tiny_cfg.T_k)
    cfg = replace(tiny_cfg, epochs=20)
    result = train(toy_corpus, cfg, splits=DatasetSplits(train=windows, val=windows, test=[]))
    assert isinstance(result.model, TcnModel)
    assert result.best_val_f1 == pytest.approx(1.0)
    assert evaluate(result.model, windows).accuracy == 1.0
    assert len(result.log) == 20
    assert list(result.log.columns) == ["epoch", "train_loss", "val_f1", "seconds"]


def test_ten_window_smoke_run(tiny_cfg):
    corpus = [build_sequence(np.zeros(12), seed=1), build_sequence(np.ones(12), seed=2)]
    result = train(corpus, replace(tiny_cfg, epochs=2))
    total = len(result.splits.train) + len(result.splits.val) + len(result.splits.test)
    assert total == 10
    assert 1 <= result.best_epoch <= 2
    assert result.model.training_manifest["data_fingerprint"] == corpus_fingerprint(corpus)


def test_training_is_deterministic(toy_corpus, tiny_cfg):
    cfg = replace(tiny_cfg, epochs=2, augment=True, noise_fraction=0.01, dropout_rate=0.1)
    first = train(toy_corpus, cfg)
    second = train(toy_corpus, cfg)
    for name, value in first.model.parameters().items():
        assert np.array_equal(second.model.parameters()[name], value)
    assert first.log["train_loss"].tolist() == second.log["train_loss"].tolist()


def test_divergence_is_reported():
    corpus = [build_sequence(np.zeros(30), seed=1), build_sequence(np.ones(30), amplitude=1e308, seed=2)]
    cfg_kwargs = dict(epochs=2, batch_size=8, T_k=8, augment=False, tcn_channels=4, tcn_levels=2, fc_sizes=(4, 4))
    with np.errstate(all="ignore"):
        with pytest.raises(TrainingDivergenceError) as excinfo:
            train(corpus, TrainConfig(**cfg_kwargs))
    assert excinfo.value.epoch == 1


def test_single_class_training_split(toy_corpus, tiny_cfg):
    stable_only = [seq for seq in toy_corpus if not seq.labels.any()]
    with pytest.raises(BalanceError):
        train(stable_only, tiny_cfg)
    with pytest.raises(FitError):
        train(stable_only, replace(tiny_cfg, model_kind="psd"))


def test_psd_training_path(toy_corpus, tiny_cfg):
    result = train(toy_corpus, replace(tiny_cfg, model_kind="psd"))
    assert isinstance(result.model, PsdDetector)
    assert result.best_epoch == 1 and len(result.log) == 1
    assert result.best_val_f1 >= 0.9
    assert result.model.training_manifest["seed"] == tiny_cfg.seed


def test_freq_cnn_training_smoke(toy_corpus, tiny_cfg):
    result = train(toy_corpus, replace(tiny_cfg, model_kind="freqcnn", epochs=2))
    assert isinstance(result.model, FreqCnnModel)
    assert len(result.log) == 2
    assert np.isfinite(result.log["train_loss"]).all()


def test_corpus_fingerprint(toy_corpus):
    first = corpus_fingerprint(toy_corpus)
    assert len(first) == 16
    assert corpus_fingerprint(toy_corpus) == first
    toy_corpus[0].pressure[0, 0] += 1.0
    assert corpus_fingerprint(toy_corpus) != first


def test_prepare_splits_needs_long_sequences(toy_corpus, tiny_cfg):
    with pytest.raises(InvalidInputError):
        prepare_splits(toy_corpus, replace(tiny_cfg, T_k=61))


# ---------------------------
# Sweeps
# ---------------------------

def test_window_sweep_single_size(toy_corpus, tiny_cfg):
    result = window_sweep(toy_corpus, replace(tiny_cfg, epochs=1), sizes=[10])
    assert result.table["T_k"].tolist() == [10]
    assert 0.0 <= result.table["test_f1"].iloc[0] <= 1.0
    assert 10 in result.inference_ms
    assert "T_k" in result.summary_text()


def test_window_sweep_errors(toy_corpus, tiny_cfg):
    with pytest.raises(InvalidInputError):
        window_sweep(toy_corpus, tiny_cfg, sizes=[])
    with pytest.raises(InvalidInputError):
        window_sweep(toy_corpus, tiny_cfg, sizes=[61])


def test_compare_methods(toy_corpus, tiny_cfg):
    table = compare_methods(toy_corpus, replace(tiny_cfg, epochs=1), seeds=(0, 1))
    assert table["method"].tolist() == ["PSD threshold", "Frequency CNN", "TCN"]
    assert (table["seeds"] == 2).all()
    assert table["f1"].between(0.0, 1.0).all()
    assert table.loc[0, "f1"] >= 0.9
    assert table["reference_f1"].tolist() == [0.575, 0.860, 0.914]
    with pytest.raises(InvalidInputError):
        compare_methods(toy_corpus, tiny_cfg, seeds=())


def _trial(make_oracle_sequence, labels, kind, surface, index):
    seq = make_oracle_sequence(np.array(labels))
    seq.name = f"{kind}_{surface.value}_{index}"
    seq.condition = ConditionTag(surface, SlipType.TRANS_PRIMARY, 0.05, Direction.S)
    return seq


def test_trial_success_per_kind_and_surface(make_oracle_sequence, label_oracle):
    episode = [0] * 20 + [1] * 15 + [0] * 10
    never_stops = [0] * 20 + [1] * 25
    trials = [
        _trial(make_oracle_sequence, episode, "tap", Surface.PLANAR, 0),
        _trial(make_oracle_sequence, episode, "lift", Surface.PLANAR, 1),
        _trial(make_oracle_sequence, episode, "tap", Surface.SPHERICAL, 2),
        _trial(make_oracle_sequence, never_stops, "lift", Surface.PLANAR, 3),
    ]
    table = trial_success_table(label_oracle(8), trials)
    assert list(table.columns) == ["kind", "surface", "trials", "successes", "success_rate"]
    assert table[["kind", "surface"]].values.tolist() == [["lift", "planar"], ["tap", "planar"], ["tap", "spherical"]]
    assert table["trials"].tolist() == [2, 1, 1]
    assert table["successes"].tolist() == [1, 1, 1]
    assert table["success_rate"].tolist() == [0.5, 1.0, 1.0]


def test_constant_models_fail_every_trial(make_oracle_sequence, constant_model):
    episode = [0] * 20 + [1] * 15 + [0] * 10
    trials = [_trial(make_oracle_sequence, episode, "tap", Surface.PLANAR, k) for k in range(2)]
    for label in (ClassLabel.STABLE, ClassLabel.SLIP):
        table = trial_success_table(constant_model(label), trials)
        assert table["trials"].tolist() == [2]
        assert table["success_rate"].tolist() == [0.0]


def test_trial_success_needs_a_replayable_sequence(make_oracle_sequence, label_oracle):
    short = _trial(make_oracle_sequence, [0, 1, 1], "tap", Surface.PLANAR, 0)
    with pytest.raises(InvalidInputError):
        trial_success_table(label_oracle(8), [short])


# ---------------------------
# Latency
# ---------------------------

def test_oracle_latency_is_two_samples(make_oracle_sequence, label_oracle):
    labels = np.array([0] * 20 + [1] * 15 + [0] * 20 + [1] * 10 + [0] * 5)
    report = measure_latency(label_oracle(8), [make_oracle_sequence(labels)])
    assert report.onsets == 2 and report.missed == 0
    assert report.latencies.tolist() == [2, 2]
    assert report.mean_samples == 2.0
    assert report.false_events == 0
    assert np.isfinite(report.mean_inference_ms)
    assert "samples to detect" in report.summary_text()


def test_never_firing_model_misses_everything(make_oracle_sequence, constant_model):
    labels = np.array([0] * 20 + [1] * 15 + [0] * 20)
    report = measure_latency(constant_model(ClassLabel.STABLE), [make_oracle_sequence(labels)])
    assert report.onsets == 1 and report.missed == 1
    assert report.detected == 0
    assert math.isnan(report.mean_samples)
    assert report.missed_fraction == 1.0


def test_short_sequences_are_skipped(make_oracle_sequence, label_oracle):
    report = measure_latency(label_oracle(8), [make_oracle_sequence(np.array([0, 1, 1]))])
    assert report.onsets == 0


def test_merge_reports():
    a = LatencyReport(np.array([2, 4]), onsets=3, missed=1, false_events=0, mean_inference_ms=1.0)
    b = LatencyReport(np.zeros(0, dtype=np.int64), onsets=1, missed=1, false_events=2)
    merged = merge_reports([a, b])
    assert (merged.onsets, merged.missed, merged.false_events) == (4, 2, 2)
    assert merged.mean_samples == 3.0
    assert merged.mean_inference_ms == 1.0


def test_time_inference(label_oracle, toy_corpus):
    windows = windows_from_corpus(toy_corpus, 8)
    assert time_inference(label_oracle(8), windows, limit=5) >= 0.0
    assert math.isnan(time_inference(label_oracle(8), []))


# ---------------------------
# Reports
# ---------------------------

def test_write_report_files(tmp_path):
    df = pd.DataFrame({"T_k": [10, 20], "f1": [0.8, float("nan")]})
    paths = write_report(df, "window_sweep", 3, str(tmp_path / "reports"), summary_text="sweep done", xlsx=True)
    assert paths["csv"].endswith("window_sweep_3.csv")
    assert pd.read_csv(paths["csv"])["T_k"].tolist() == [10, 20]
    with open(paths["txt"], encoding="utf-8") as fh:
        assert fh.read() == "window_sweep (seed 3)\n\nsweep done\n"
    ws = load_workbook(paths["xlsx"]).active
    assert ws.cell(row=1, column=1).value == "T_k"
    assert ws.cell(row=1, column=1).font.bold
    assert ws.cell(row=3, column=2).value is None


def test_write_table_and_excel(tmp_path):
    df = pd.DataFrame({"method": ["TCN"], "f1": [0.91]})
    paths = write_table(df, str(tmp_path / "out" / "compare.csv"), xlsx=True)
    assert paths["txt"].endswith("compare.txt")
    assert paths["xlsx"].endswith("compare.xlsx")
    path = save_table_to_excel(df, str(tmp_path / "plain.xlsx"), sheet_name="x" * 40)
    assert load_workbook(path).active.title == "x" * 31

#!/usr/bin/env python3
"""
End-to-end checks on the default synthetic corpus

These train full-size models and take a long time; run with `pytest -m slow`.
"""

from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from src.harness.latency import REFERENCE_SAMPLES_TO_DETECT, measure_latency
from src.harness.metrics import evaluate
from src.harness.sweep import compare_methods, window_sweep
from src.harness.train_config import TrainConfig
from src.harness.trainer import train
from src.simulation.signal_generator import generate_corpus
from src.simulation.sim_config import SimConfig

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def default_corpus():
    return generate_corpus(SimConfig())


@pytest.fixture(scope="module")
def trained_tcn(default_corpus):
    return train(default_corpus, TrainConfig())


@pytest.fixture(scope="module")
def onset_sequences():
    cfg = replace(SimConfig(), seed=101, corpus_slip_frames=5000, static_sequences=0)
    return generate_corpus(cfg)


@pytest.fixture(scope="module")
def sweep_result(default_corpus):
    return window_sweep(default_corpus, TrainConfig(), sizes=[10, 100])


def test_tcn_reaches_target_f1(trained_tcn):
    report = evaluate(trained_tcn.model, trained_tcn.splits.test)
    assert report.f1 >= 0.90
    assert trained_tcn.best_epoch <= 50


def test_training_is_reproducible(default_corpus, trained_tcn):
    again = train(default_corpus, TrainConfig())
    for name, value in trained_tcn.model.parameters().items():
        assert np.array_equal(again.model.parameters()[name], value)
    assert again.best_epoch == trained_tcn.best_epoch
    columns = ["epoch", "train_loss", "val_f1"]
    pd.testing.assert_frame_equal(again.log[columns], trained_tcn.log[columns])
    assert evaluate(again.model, again.splits.test).to_row() == evaluate(trained_tcn.model, trained_tcn.splits.test).to_row()


def test_streaming_latency(trained_tcn, onset_sequences):
    report = measure_latency(trained_tcn.model, onset_sequences)
    assert report.onsets >= 50
    assert 2.0 <= report.mean_samples <= 30.0
    assert report.missed_fraction <= 0.10
    assert str(REFERENCE_SAMPLES_TO_DETECT) in report.summary_text()


def test_latency_is_reproducible(trained_tcn, onset_sequences):
    first = measure_latency(trained_tcn.model, onset_sequences)
    second = measure_latency(trained_tcn.model, onset_sequences)
    assert np.array_equal(first.latencies, second.latencies)
    assert first.to_row() == pytest.approx(second.to_row(), nan_ok=True)


def test_longer_windows_do_not_hurt(sweep_result):
    f1 = dict(zip(sweep_result.table["T_k"], sweep_result.table["test_f1"]))
    assert f1[100] >= f1[10]


def test_window_sweep_is_reproducible(default_corpus, sweep_result):
    again = window_sweep(default_corpus, TrainConfig(), sizes=[10, 100])
    pd.testing.assert_frame_equal(again.table, sweep_result.table)


def test_all_methods_produce_metrics(default_corpus):
    table = compare_methods(default_corpus, TrainConfig(epochs=10), seeds=(0,))
    for column in ("accuracy", "precision", "recall", "f1"):
        assert table[column].between(0.0, 1.0).all()

#!/usr/bin/env python3
"""
Shared fixtures

Toy corpora have a known answer: stable frames are a flat baseline with a
little noise, slip frames add a large Nyquist-rate alternation on every
channel. The simulated corpus is a reduced-size version of the default one.
"""

import numpy as np
import pytest

from src.core.tactile_types import ClassLabel, ConditionTag, Direction, LabeledSequence, SlipType, Surface
from src.harness.train_config import TrainConfig
from src.models.base import Classifier, as_pressures
from src.simulation.signal_generator import generate_corpus
from src.simulation.sim_config import SimConfig

SLIP_CONDITION = ConditionTag(Surface.PLANAR, SlipType.TRANS_PRIMARY, 0.05, Direction.E)
STATIC_CONDITION = ConditionTag.static(Surface.PLANAR)


def build_sequence(labels, amplitude=200.0, noise=1.0, seed=0, base=400.0, condition=None, name=""):
    labels = np.asarray(labels, dtype=np.int8)
    n = len(labels)
    rng = np.random.default_rng(seed)
    alternation = amplitude * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    pressure = base + noise * rng.standard_normal((n, 6)) + (labels * alternation)[:, None]
    velocity = np.zeros((n, 2))
    velocity[:, 0] = 0.05 * labels
    if condition is None:
        condition = SLIP_CONDITION if labels.any() else STATIC_CONDITION
    return LabeledSequence(
        t=np.arange(n) / 100.0,
        pressure=pressure,
        velocity=velocity,
        omega=np.zeros(n),
        labels=labels,
        condition=condition,
        barometer_range=1000.0,
        name=name,
    )


def build_oracle_sequence(labels):
    """Channel 0 carries the label (x1000) so an oracle model can read it back"""
    seq = build_sequence(labels, amplitude=0.0, noise=0.0)
    seq.pressure[:, 0] = 1000.0 * seq.labels
    return seq


class LabelOracle(Classifier):
    """Predicts the label encoded in channel 0 of the newest frame"""

    kind = "oracle"

    def __init__(self, T_k: int = 8):
        self.T_k = T_k
        self.training_manifest = {}

    def predict_proba(self, windows, batch_size=1024):
        pressures = as_pressures(windows)
        slip = (pressures[:, -1, 0] > 500.0).astype(np.float64)
        return np.stack([1.0 - slip, slip], axis=1)


class ConstantModel(Classifier):
    kind = "constant"

    def __init__(self, label: ClassLabel, T_k: int = 8):
        self.label = label
        self.T_k = T_k
        self.training_manifest = {}

    def predict_proba(self, windows, batch_size=1024):
        n = len(as_pressures(windows))
        proba = np.zeros((n, 2))
        proba[:, self.label.value] = 1.0
        return proba


@pytest.fixture
def make_sequence():
    return build_sequence


@pytest.fixture
def make_oracle_sequence():
    return build_oracle_sequence


@pytest.fixture
def toy_corpus():
    """Three all-stable and three all-slip sequences of 60 frames"""
    corpus = []
    for k in range(3):
        corpus.append(build_sequence(np.zeros(60), seed=k, name=f"stable_{k}"))
        corpus.append(build_sequence(np.ones(60), seed=10 + k, name=f"slip_{k}"))
    return corpus


@pytest.fixture
def tiny_cfg():
    return TrainConfig(
        epochs=3,
        batch_size=16,
        lr=0.005,
        seed=0,
        T_k=8,
        augment=False,
        noise_fraction=0.0,
        tcn_channels=8,
        tcn_levels=2,
        fc_sizes=(16, 8),
        dropout_rate=0.0,
        cnn_channels=(4, 4),
        cnn_fc_size=8,
    )


@pytest.fixture
def randomize_output():
    """Replace a zero-initialized output layer with random weights"""

    def apply(model, seed=0):
        rng = np.random.default_rng(seed)
        weight = model.out.params["weight"]
        weight[...] = rng.normal(0.0, 0.5, size=weight.shape)
        return model

    return apply


@pytest.fixture(scope="session")
def small_sim_config():
    return SimConfig(seed=3, corpus_slip_frames=4000, sequence_duration=4.0, static_sequences=4)


@pytest.fixture(scope="session")
def small_corpus(small_sim_config):
    return generate_corpus(small_sim_config)


@pytest.fixture
def label_oracle():
    return LabelOracle


@pytest.fixture
def constant_model():
    return ConstantModel

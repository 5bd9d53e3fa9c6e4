#!/usr/bin/env python3
"""
Training loop

Per epoch: balance the classes by undersampling, shuffle, augment each
sample (random symmetry op plus Gaussian noise) when enabled, then take
mini-batch Adam steps. The model state with the best validation weighted
F1 is kept.
"""

import hashlib
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..core.errors import BalanceError, ConfigError, InvalidInputError, TrainingDivergenceError
from ..core.tactile_types import LabeledSequence
from ..dataset.augmentation import augment_batch
from ..dataset.splitting import SplitSpec, balance_indices, epoch_rng, stratified_split
from ..dataset.windowing import WindowSample, stack_windows, window_labels, windows_from_corpus
from ..models.base import NeuralClassifier
from ..models.freq_cnn import FreqCnnModel
from ..models.psd_detector import PsdDetector, psd_fit_threshold
from ..models.tcn import TcnModel, build_tcn_architecture
from ..neural.losses import softmax_cross_entropy
from ..neural.optimizer import AdamState, adam_step
from .metrics import weighted_f1
from .train_config import TrainConfig

logger = logging.getLogger(__name__)

Model = Union[TcnModel, FreqCnnModel, PsdDetector]


@dataclass
class DatasetSplits:
    train: List[WindowSample]
    val: List[WindowSample]
    test: List[WindowSample]


@dataclass
class TrainingResult:
    model: Model
    # epoch, train_loss, val_f1, seconds
    log: pd.DataFrame
    splits: DatasetSplits
    best_epoch: int
    best_val_f1: float


def corpus_fingerprint(corpus: Sequence[LabeledSequence]) -> str:
    """Short digest of the pressures and labels of a corpus"""
    digest = hashlib.sha256()
    for seq in corpus:
        digest.update(np.ascontiguousarray(seq.pressure).tobytes())
        digest.update(np.ascontiguousarray(seq.labels).tobytes())
    return digest.hexdigest()[:16]


def prepare_splits(corpus: Sequence[LabeledSequence], cfg: TrainConfig) -> DatasetSplits:
    """Window the corpus with cfg.T_k / cfg.stride and split it stratified with cfg.seed"""
    windows = windows_from_corpus(corpus, cfg.T_k, cfg.stride)
    if not windows:
        raise InvalidInputError(f"No sequence is long enough for T_k={cfg.T_k}")
    spec = SplitSpec(cfg.train_fraction, cfg.val_fraction, cfg.test_fraction, cfg.seed)
    train, val, test = stratified_split(windows, spec)
    logger.info(f"✅ {len(windows)} windows (T_k={cfg.T_k}): train {len(train)}, val {len(val)}, test {len(test)}")
    return DatasetSplits(train, val, test)


def build_model(cfg: TrainConfig) -> NeuralClassifier:
    """Untrained neural model of cfg.model_kind"""
    if cfg.model_kind == TcnModel.kind:
        arch = build_tcn_architecture(
            T_k=cfg.T_k,
            channels=cfg.tcn_channels,
            num_levels=cfg.tcn_levels,
            kernel_size=cfg.tcn_kernel_size,
            fc_sizes=cfg.fc_sizes,
            dropout_rate=cfg.dropout_rate,
        )
        return TcnModel(arch, seed=cfg.seed)
    if cfg.model_kind == FreqCnnModel.kind:
        return FreqCnnModel(
            T_k=cfg.T_k,
            conv_channels=cfg.cnn_channels,
            fc_size=cfg.cnn_fc_size,
            dropout_rate=cfg.dropout_rate,
            seed=cfg.seed,
        )
    raise ConfigError(f"'{cfg.model_kind}' is not a neural model kind")


def _training_manifest(cfg: TrainConfig, corpus: Sequence[LabeledSequence], splits: DatasetSplits) -> dict:
    return {
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "lr": cfg.lr,
        "betas": [AdamState().beta1, AdamState().beta2],
        "T_k": cfg.T_k,
        "stride": cfg.stride,
        "augment": cfg.augment,
        "noise_fraction": cfg.noise_fraction,
        "split": [cfg.train_fraction, cfg.val_fraction, cfg.test_fraction],
        "data_fingerprint": corpus_fingerprint(corpus),
        "train_windows": len(splits.train),
    }


def _fit_psd(cfg: TrainConfig, splits: DatasetSplits, manifest: dict) -> TrainingResult:
    start = time.perf_counter()
    detector = psd_fit_threshold(splits.train, cutoff=cfg.psd_cutoff)
    eval_windows = splits.val or splits.train
    val_f1 = weighted_f1(window_labels(eval_windows), detector.predict(eval_windows))
    detector.training_manifest = dict(manifest, best_epoch=1, best_val_f1=val_f1)
    log = pd.DataFrame(
        [{"epoch": 1, "train_loss": float("nan"), "val_f1": val_f1, "seconds": time.perf_counter() - start}]
    )
    return TrainingResult(detector, log, splits, best_epoch=1, best_val_f1=val_f1)


def train(
    corpus: Sequence[LabeledSequence],
    cfg: TrainConfig,
    splits: Optional[DatasetSplits] = None,
) -> TrainingResult:
    """
    Train a model of cfg.model_kind on a labeled corpus

    Args:
        corpus: labeled sequences (both classes must occur)
        cfg: hyperparameters
        splits: precomputed splits; derived from corpus and cfg when omitted

    Returns:
        TrainingResult holding the best-validation model and the epoch log

    Raises:
        BalanceError: the training split holds a single class
        TrainingDivergenceError: loss became NaN/Inf
    """
    splits = splits or prepare_splits(corpus, cfg)
    if not splits.train:
        raise InvalidInputError("Training split is empty")
    manifest = _training_manifest(cfg, corpus, splits)
    if cfg.model_kind == PsdDetector.kind:
        return _fit_psd(cfg, splits, manifest)

    x_train, y_train = stack_windows(splits.train)
    if np.unique(y_train).size < 2:
        raise BalanceError("Training split holds a single class")
    eval_windows = splits.val or splits.train
    x_val, y_val = stack_windows(eval_windows)
    barometer_range = float(corpus[0].barometer_range) if corpus else 1000.0

    model = build_model(cfg)
    # epochs count from 1, so stream 0 is free for the scale subsample
    model.fit_input_scale(x_train, epoch_rng(cfg.seed, 0))
    state = AdamState(lr=cfg.lr)
    logger.info(
        f"🔄 Training {model.kind} ({model.parameter_count()} parameters) for {cfg.epochs} epochs, "
        f"batch {cfg.batch_size}, lr {cfg.lr}"
    )

    rows = []
    best_f1 = -1.0
    best_epoch = 0
    best_state = model.snapshot()
    for epoch in range(1, cfg.epochs + 1):
        start = time.perf_counter()
        rng = epoch_rng(cfg.seed, epoch)
        order = balance_indices(y_train, rng)
        order = order[rng.permutation(len(order))]
        total_loss = 0.0
        for first in range(0, len(order), cfg.batch_size):
            batch = order[first:first + cfg.batch_size]
            xb = x_train[batch]
            if cfg.augment:
                xb = augment_batch(xb, rng, cfg.noise_fraction, barometer_range)
            model.zero_grad()
            logits = model.forward(xb, training=True, rng=rng)
            if not np.all(np.isfinite(logits)):
                logger.error(f"❌ Non-finite logits at epoch {epoch}")
                raise TrainingDivergenceError(epoch, float("nan"))
            loss, d_logits = softmax_cross_entropy(logits, y_train[batch])
            if not np.isfinite(loss):
                logger.error(f"❌ Loss {loss} at epoch {epoch}")
                raise TrainingDivergenceError(epoch, loss)
            model.backward(d_logits)
            adam_step(model.parameters(), model.gradients(), state)
            total_loss += loss * len(batch)

        train_loss = total_loss / len(order)
        val_f1 = weighted_f1(y_val, model.predict(x_val))
        improved = val_f1 > best_f1
        if improved:
            best_f1, best_epoch, best_state = val_f1, epoch, model.snapshot()
        seconds = time.perf_counter() - start
        rows.append({"epoch": epoch, "train_loss": train_loss, "val_f1": val_f1, "seconds": seconds})
        logger.info(
            f"Epoch {epoch}/{cfg.epochs}: loss {train_loss:.4f}, val F1 {val_f1:.4f}{' *' if improved else ''} ({seconds:.1f}s)"
        )

    model.restore(best_state)
    model.training_manifest = dict(manifest, best_epoch=best_epoch, best_val_f1=best_f1)
    logger.info(f"✅ Best validation F1 {best_f1:.4f} at epoch {best_epoch}")
    return TrainingResult(model, pd.DataFrame(rows), splits, best_epoch=best_epoch, best_val_f1=best_f1)

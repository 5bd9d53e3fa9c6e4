#!/usr/bin/env python3
"""
Command line subcommands and exit codes
"""

import io
import json
import os

import numpy as np
import pandas as pd
import pytest

from src.cli.baroslip_cli import EXIT_DATA, EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, main
from src.dataset.corpus_store import MANIFEST_NAME, load_corpus, save_corpus
from src.models.model_store import load_model
from src.models.psd_detector import PsdDetector
from src.models.tcn import TcnModel

from conftest import build_sequence

TINY_TRAINING = {
    "epochs": 1,
    "batch_size": 32,
    "T_k": 8,
    "augment": False,
    "tcn_channels": 4,
    "tcn_levels": 2,
    "fc_sizes": [8, 4],
    "cnn_channels": [2, 2],
    "cnn_fc_size": 4,
}


@pytest.fixture
def workspace(tmp_path):
    """Config directory with a tiny training config, plus a corpus with slip onsets"""
    config_dir = tmp_path / "config"
    config_dir.mkdir()
    (config_dir / "train_config.json").write_text(json.dumps(TINY_TRAINING))
    corpus = []
    for k in range(4):
        corpus.append(build_sequence(np.array([0] * 30 + [1] * 30 + [0] * 20), seed=k, name=f"episode_{k}"))
        corpus.append(build_sequence(np.zeros(60), seed=10 + k, name=f"quiet_{k}"))
    save_corpus(corpus, str(tmp_path / "corpus"))
    return tmp_path


def run(workspace, *argv):
    return main(["-q", "--config-dir", str(workspace / "config"), *argv])


def test_simulate_writes_corpus_and_events(tmp_path):
    sim = tmp_path / "sim.json"
    sim.write_text(json.dumps({"seed": 1, "corpus_slip_frames": 300, "sequence_duration": 4.0, "static_sequences": 2}))
    out = tmp_path / "sim_corpus"
    assert main(["-q", "simulate", "--config", str(sim), "--out", str(out), "--events", "2"]) == EXIT_OK
    corpus = load_corpus(str(out))
    assert sum(seq.slip_frame_count() for seq in corpus) == pytest.approx(300, abs=60)
    assert sum(seq.condition.is_static for seq in corpus) == 2
    events = load_corpus(str(out / "events"))
    assert [seq.name.split("_")[0] for seq in events] == ["tap", "lift"]


def test_simulate_seed_override_changes_corpus(tmp_path):
    sim = tmp_path / "sim.json"
    sim.write_text(json.dumps({"corpus_slip_frames": 100, "sequence_duration": 4.0, "static_sequences": 0}))
    assert main(["-q", "simulate", "--config", str(sim), "--out", str(tmp_path / "a"), "--seed", "1"]) == EXIT_OK
    assert main(["-q", "simulate", "--config", str(sim), "--out", str(tmp_path / "b"), "--seed", "2"]) == EXIT_OK
    assert load_corpus(str(tmp_path / "a")) != load_corpus(str(tmp_path / "b"))


def test_train_eval_latency_detect_with_psd(workspace, capsys):
    model_path = str(workspace / "psd.model")
    corpus = str(workspace / "corpus")
    assert run(workspace, "train", "--corpus", corpus, "--out", model_path, "--model-kind", "psd") == EXIT_OK
    model = load_model(model_path)
    assert isinstance(model, PsdDetector) and model.T_k == 8
    assert os.path.exists(str(workspace / "psd_epochs.csv"))

    report = str(workspace / "reports" / "psd_eval.csv")
    assert run(workspace, "eval", "--model", model_path, "--corpus", corpus, "--report", report, "--xlsx") == EXIT_OK
    row = pd.read_csv(report).iloc[0]
    assert row["model"] == "psd" and row["split"] == "test"
    assert 0.0 <= row["f1"] <= 1.0
    assert os.path.exists(str(workspace / "reports" / "psd_eval_conditions.csv"))
    assert os.path.exists(str(workspace / "reports" / "psd_eval.xlsx"))
    assert "accuracy" in capsys.readouterr().out

    latency = str(workspace / "reports" / "latency.csv")
    assert run(workspace, "latency", "--model", model_path, "--corpus", corpus, "--report", latency) == EXIT_OK
    assert pd.read_csv(latency).iloc[0]["onsets"] == 4

    events = str(workspace / "events.csv")
    record = str(workspace / "corpus" / "seq_00000.csv")
    assert run(workspace, "detect", "--model", model_path, "--input", record, "--events", events) == EXIT_OK
    assert "slip event(s)" in capsys.readouterr().out
    assert "registered" in pd.read_csv(events)["transition"].tolist()


def test_detect_reads_stdin(workspace, monkeypatch, capsys):
    model_path = str(workspace / "psd.model")
    corpus = str(workspace / "corpus")
    assert run(workspace, "train", "--corpus", corpus, "--out", model_path, "--model-kind", "psd") == EXIT_OK
    with open(str(workspace / "corpus" / "seq_00000.csv"), encoding="utf-8") as fh:
        monkeypatch.setattr("sys.stdin", io.StringIO(fh.read()))
    assert run(workspace, "detect", "--model", model_path, "--input", "-") == EXIT_OK
    assert "80 frames" in capsys.readouterr().out


def test_detect_trial_success_report(workspace, capsys):
    model_path = str(workspace / "psd.model")
    assert run(workspace, "train", "--corpus", str(workspace / "corpus"), "--out", model_path, "--model-kind", "psd") == EXIT_OK
    labels = np.array([0] * 30 + [1] * 30 + [0] * 20)
    trials = [build_sequence(labels, seed=20 + k, name=f"{kind}_planar_{k}") for k, kind in enumerate(["tap", "lift", "tap"])]
    save_corpus(trials, str(workspace / "trials"))
    report = str(workspace / "reports" / "trials.csv")
    argv = ["detect", "--model", model_path, "--input", str(workspace / "trials"), "--trials", report, "--xlsx"]
    assert run(workspace, *argv) == EXIT_OK
    table = pd.read_csv(report)
    assert table["kind"].tolist() == ["lift", "tap"]
    assert table["trials"].tolist() == [1, 2]
    assert table["success_rate"].between(0.0, 1.0).all()
    assert os.path.exists(str(workspace / "reports" / "trials.xlsx"))
    assert "success_rate" in capsys.readouterr().out

    record = str(workspace / "trials" / "seq_00000.csv")
    assert run(workspace, "detect", "--model", model_path, "--input", record, "--trials", report) == EXIT_USAGE


def test_eval_on_all_windows(workspace):
    model_path = str(workspace / "psd.model")
    corpus = str(workspace / "corpus")
    run(workspace, "train", "--corpus", corpus, "--out", model_path, "--model-kind", "psd")
    report = str(workspace / "all.csv")
    assert run(workspace, "eval", "--model", model_path, "--corpus", corpus, "--report", report, "--split", "all") == EXIT_OK
    windows = 4 * (80 - 7) + 4 * (60 - 7)
    assert pd.read_csv(report).iloc[0]["windows"] == windows


def test_train_tcn_with_overrides(workspace):
    model_path = str(workspace / "tcn.model")
    args = ["train", "--corpus", str(workspace / "corpus"), "--out", model_path, "--model-kind", "tcn", "--epochs", "2", "--seed", "5"]
    assert run(workspace, *args) == EXIT_OK
    model = load_model(model_path)
    assert isinstance(model, TcnModel)
    assert model.training_manifest["epochs"] == 2
    assert model.training_manifest["seed"] == 5
    assert len(pd.read_csv(str(workspace / "tcn_epochs.csv"))) == 2


def test_sweep_single_size(workspace):
    out = str(workspace / "sweep.csv")
    assert run(workspace, "sweep", "--corpus", str(workspace / "corpus"), "--out", out, "--sizes", "10") == EXIT_OK
    assert pd.read_csv(out)["T_k"].tolist() == [10]


def test_compare_writes_seeded_report(workspace):
    out = workspace / "compare"
    assert run(workspace, "compare", "--corpus", str(workspace / "corpus"), "--out", str(out), "--seeds", "0", "1") == EXIT_OK
    table = pd.read_csv(str(out / "compare_0.csv"))
    assert table["method"].tolist() == ["PSD threshold", "Frequency CNN", "TCN"]


def test_missing_path_is_a_usage_error(workspace):
    code = run(workspace, "train", "--corpus", str(workspace / "nowhere"), "--out", str(workspace / "m.model"))
    assert code == EXIT_USAGE


def test_unknown_subcommand_exits_with_usage_code():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == EXIT_USAGE


def test_malformed_corpus_is_a_data_error(workspace):
    bad = workspace / "bad_corpus"
    bad.mkdir()
    (bad / MANIFEST_NAME).write_text("{")
    assert run(workspace, "train", "--corpus", str(bad), "--out", str(workspace / "m.model")) == EXIT_DATA


def test_bad_model_file_is_a_data_error(workspace):
    bogus = workspace / "bogus.model"
    bogus.write_bytes(b"not a model\n{}\n")
    report = str(workspace / "r.csv")
    assert run(workspace, "eval", "--model", str(bogus), "--corpus", str(workspace / "corpus"), "--report", report) == EXIT_DATA


def test_diverging_training_exit_code(workspace):
    corpus = [build_sequence(np.zeros(30), seed=1), build_sequence(np.ones(30), amplitude=1e308, seed=2)]
    save_corpus(corpus, str(workspace / "huge"))
    with np.errstate(all="ignore"):
        code = run(workspace, "train", "--corpus", str(workspace / "huge"), "--out", str(workspace / "m.model"))
    assert code == EXIT_DIVERGED

#!/usr/bin/env python3
"""
Windowing, splitting, balancing, augmentation and the corpus directory format
"""

import io
import json
import os

import numpy as np
import pytest

from src.core.errors import BalanceError, CorpusParseError, InvalidInputError, VersionError, WindowRangeError
from src.core.tactile_types import ClassLabel, ConditionTag, Direction, SlipType, Surface
from src.dataset.augmentation import (
    AUGMENT_OPS,
    PERMUTATION_TABLE,
    AugmentOp,
    augment,
    augment_batch,
    compose,
    random_augment_and_noise,
)
from src.dataset.corpus_store import (
    MANIFEST_NAME,
    corpus_summary,
    load_corpus,
    load_sequence_file,
    parse_frame_row,
    read_frames,
    save_corpus,
)
from src.dataset.splitting import (
    SplitSpec,
    balance_indices,
    epoch_rng,
    stratified_split,
    stratified_split_indices,
    undersample_balance,
)
from src.dataset.windowing import WindowSample, make_windows, stack_windows, window_labels, windows_from_corpus

OBLIQUE = ConditionTag(Surface.PLANAR, SlipType.TRANS_OBLIQUE, 0.05, Direction.NE)


def sample_window(seed=0):
    rng = np.random.default_rng(seed)
    return WindowSample(pressures=rng.normal(size=(10, 6)), label=ClassLabel.SLIP, condition=OBLIQUE)


# ---------------------------
# Windowing
# ---------------------------

@pytest.mark.parametrize("length, T_k, stride, expected", [(100, 100, 1, 1), (150, 100, 10, 6), (150, 100, 1, 51)])
def test_window_counts(make_sequence, length, T_k, stride, expected):
    assert len(make_windows(make_sequence(np.zeros(length)), T_k, stride)) == expected


def test_window_range_errors(make_sequence):
    seq = make_sequence(np.zeros(99))
    with pytest.raises(WindowRangeError):
        make_windows(seq, 100)
    with pytest.raises(WindowRangeError):
        make_windows(seq, 10, stride=0)


def test_windows_take_newest_label_and_rows(make_sequence):
    labels = np.zeros(120)
    labels[-1] = 1
    seq = make_sequence(labels)
    windows = make_windows(seq, 100, stride=1)
    assert windows[-1].label is ClassLabel.SLIP
    assert all(w.label is ClassLabel.STABLE for w in windows[:-1])
    assert np.array_equal(windows[5].pressures, seq.pressure[5:105])
    assert windows[0].condition == seq.condition


def test_windows_from_corpus_skips_short_sequences(make_sequence):
    corpus = [make_sequence(np.zeros(20)), make_sequence(np.zeros(5))]
    assert len(windows_from_corpus(corpus, 8)) == 13


def test_stack_windows(make_sequence):
    windows = make_windows(make_sequence(np.ones(12)), 8)
    pressures, labels = stack_windows(windows)
    assert pressures.shape == (5, 8, 6) and pressures.dtype == np.float64
    assert labels.tolist() == [1] * 5
    assert window_labels(windows).tolist() == [1] * 5
    with pytest.raises(InvalidInputError):
        stack_windows([])


# ---------------------------
# Splitting
# ---------------------------

def split_sizes(keys, seed=0):
    return tuple(len(part) for part in stratified_split_indices(keys, SplitSpec(seed=seed)))


def test_split_one_stratum():
    assert split_sizes(["a"] * 100) == (80, 10, 10)
    assert split_sizes(["a"] * 10) == (8, 1, 1)


def test_split_two_strata_are_proportional():
    keys = ["a"] * 50 + ["b"] * 50
    train, val, test = stratified_split_indices(keys, SplitSpec(seed=3))
    for part, size in ((train, 40), (val, 5), (test, 5)):
        assert sum(keys[i] == "a" for i in part) == size
        assert sum(keys[i] == "b" for i in part) == size


def test_split_is_a_partition_and_seeded():
    keys = [i % 7 for i in range(333)]
    train, val, test = stratified_split_indices(keys, SplitSpec(seed=5))
    combined = np.concatenate([train, val, test])
    assert sorted(combined.tolist()) == list(range(333))
    again = stratified_split_indices(keys, SplitSpec(seed=5))
    assert all(np.array_equal(a, b) for a, b in zip((train, val, test), again))
    other = stratified_split_indices(keys, SplitSpec(seed=6))
    assert not np.array_equal(test, other[2])


def test_tiny_stratum_goes_to_train():
    assert split_sizes(["a"] * 3) == (3, 0, 0)


def test_split_spec_validation():
    with pytest.raises(Exception):
        SplitSpec(0.8, 0.1, 0.2)


def test_stratified_split_on_windows(toy_corpus):
    windows = windows_from_corpus(toy_corpus, 8)
    train, val, test = stratified_split(windows, SplitSpec())
    assert len(train) + len(val) + len(test) == len(windows)
    for part in (train, val, test):
        assert set(window_labels(part).tolist()) == {0, 1}


def test_balance_counts():
    rng = np.random.default_rng(0)
    labels = np.array([0] * 143584 + [1] * 122918)
    chosen = balance_indices(labels, rng)
    assert len(chosen) == 2 * 122918
    assert np.count_nonzero(labels[chosen] == 1) == 122918
    assert len(np.unique(chosen)) == len(chosen)


def test_balance_small_cases():
    rng = np.random.default_rng(1)
    chosen = balance_indices(np.array([0, 0, 0, 1]), rng)
    assert len(chosen) == 2 and 3 in chosen.tolist()
    labels = np.array([0, 1] * 10)
    assert sorted(balance_indices(labels, rng).tolist()) == list(range(20))
    with pytest.raises(BalanceError):
        balance_indices(np.zeros(5), rng)


def test_undersample_balance_is_uniform(make_sequence):
    labels = np.concatenate([np.zeros(40), np.ones(15)])
    windows = make_windows(make_sequence(labels), 4)
    balanced = undersample_balance(windows, seed=2)
    counts = np.bincount(window_labels(balanced), minlength=2)
    assert counts[0] == counts[1] == 15


def test_epoch_rng_is_reproducible():
    assert epoch_rng(3, 1).integers(1 << 30) == epoch_rng(3, 1).integers(1 << 30)
    assert epoch_rng(3, 1).integers(1 << 30) != epoch_rng(3, 2).integers(1 << 30)


# ---------------------------
# Augmentation
# ---------------------------

def test_identity_and_involutions():
    s = sample_window()
    assert augment(s, AugmentOp.IDENTITY) == s
    for op in AUGMENT_OPS:
        assert augment(augment(s, op), op) == s


def test_klein_group_table():
    expected = {
        (AugmentOp.FLIP_X, AugmentOp.FLIP_Y): AugmentOp.ROT_180,
        (AugmentOp.FLIP_Y, AugmentOp.FLIP_X): AugmentOp.ROT_180,
        (AugmentOp.FLIP_X, AugmentOp.ROT_180): AugmentOp.FLIP_Y,
        (AugmentOp.ROT_180, AugmentOp.FLIP_Y): AugmentOp.FLIP_X,
    }
    s = sample_window(1)
    for a in AUGMENT_OPS:
        assert compose(a, a) is AugmentOp.IDENTITY
        assert compose(AugmentOp.IDENTITY, a) is a
        for b in AUGMENT_OPS:
            assert augment(augment(s, a), b) == augment(s, compose(a, b))
    for (a, b), c in expected.items():
        assert compose(a, b) is c
    assert augment(augment(s, AugmentOp.FLIP_X), AugmentOp.FLIP_Y) == augment(s, AugmentOp.ROT_180)


def test_flip_x_mirrors_columns_and_direction():
    s = sample_window(2)
    flipped = augment(s, AugmentOp.FLIP_X)
    assert np.array_equal(flipped.pressures[:, 0], s.pressures[:, 2])
    assert np.array_equal(flipped.pressures[:, 4], s.pressures[:, 4])
    assert flipped.condition.direction is Direction.NW
    assert flipped.label is s.label
    rotated = augment(s, AugmentOp.ROT_180)
    assert rotated.condition.direction is Direction.SW
    assert np.array_equal(rotated.pressures[:, 0], s.pressures[:, 5])


def test_forced_identity_without_noise_is_unchanged():
    s = sample_window(3)
    out = random_augment_and_noise(s, np.random.default_rng(0), 0.0, 1000.0, op=AugmentOp.IDENTITY)
    assert out == s
    with pytest.raises(InvalidInputError):
        random_augment_and_noise(s, np.random.default_rng(0), -0.1, 1000.0)


def test_noise_std_matches_fraction_of_range():
    rng = np.random.default_rng(4)
    out = augment_batch(np.zeros((200, 100, 6)), rng, 0.01, 1000.0)
    assert np.std(out) == pytest.approx(10.0, rel=0.02)


def test_ops_drawn_uniformly():
    rng = np.random.default_rng(5)
    n = 100_000
    batch = np.broadcast_to(np.arange(6, dtype=np.float64), (n, 1, 6))
    out = augment_batch(batch, rng, 0.0, 1000.0)
    for k in range(len(AUGMENT_OPS)):
        share = np.mean(np.all(out[:, 0, :] == PERMUTATION_TABLE[k], axis=1))
        assert share == pytest.approx(0.25, abs=0.01)


def test_augment_batch_with_forced_ops_matches_single_augment():
    s = sample_window(6)
    ops = [1, 2, 3]
    out = augment_batch(np.stack([s.pressures] * 3), np.random.default_rng(0), 0.0, 1000.0, ops=ops)
    for row, k in zip(out, ops):
        assert np.array_equal(row, augment(s, AUGMENT_OPS[k]).pressures)


def test_augmentation_keeps_class_histogram(toy_corpus):
    windows = windows_from_corpus(toy_corpus, 8)
    rng = np.random.default_rng(9)
    augmented = [random_augment_and_noise(w, rng, 0.01, 1000.0) for w in windows]
    before = np.bincount(window_labels(windows), minlength=2)
    assert before.tolist() == [3 * 53, 3 * 53]
    assert np.bincount(window_labels(augmented), minlength=2).tolist() == before.tolist()
    # batches keep their row order, so the label vector stays aligned
    pressures, _ = stack_windows(windows)
    out = augment_batch(pressures, rng, 0.0, 1000.0)
    assert np.array_equal(np.sort(out, axis=2), np.sort(pressures, axis=2))


# ---------------------------
# Corpus store
# ---------------------------

def test_corpus_round_trip_is_bit_exact(tmp_path, make_sequence):
    seq = make_sequence(np.array([0] * 10 + [1] * 5 + [0] * 3), seed=7, name="awkward")
    seq.pressure[0, 0] = 0.1 + 0.2
    seq.pressure[1, 1] = 1e-17
    seq.pressure[2, 2] = -3.3333333333333335
    corpus = [seq, make_sequence(np.zeros(12), seed=8, name="quiet")]
    save_corpus(corpus, str(tmp_path))
    loaded = load_corpus(str(tmp_path))
    assert loaded == corpus
    assert [s.name for s in loaded] == ["awkward", "quiet"]


def test_simulated_corpus_round_trip(tmp_path, small_corpus):
    save_corpus(small_corpus, str(tmp_path))
    assert load_corpus(str(tmp_path)) == small_corpus


def test_empty_corpus(tmp_path):
    save_corpus([], str(tmp_path))
    manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
    assert manifest["sequences"] == []
    assert load_corpus(str(tmp_path)) == []


def rewrite_manifest(path, **changes):
    manifest_path = os.path.join(path, MANIFEST_NAME)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    manifest.update(changes)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh)


def test_wrong_magic_and_version(tmp_path, make_sequence):
    save_corpus([make_sequence(np.zeros(12))], str(tmp_path))
    rewrite_manifest(str(tmp_path), format_version=2)
    with pytest.raises(VersionError):
        load_corpus(str(tmp_path))
    rewrite_manifest(str(tmp_path), format="something-else", format_version=1)
    with pytest.raises(CorpusParseError):
        load_corpus(str(tmp_path))


def corrupt_cell(file_path, line_no, column, value):
    with open(file_path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    cells = lines[line_no - 1].split(",")
    cells[column] = value
    lines[line_no - 1] = ",".join(cells)
    with open(file_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def test_unparsable_cell_reports_line(tmp_path, make_sequence):
    save_corpus([make_sequence(np.zeros(12))], str(tmp_path))
    corrupt_cell(str(tmp_path / "seq_00000.csv"), 3, 1, "abc")
    with pytest.raises(CorpusParseError) as excinfo:
        load_corpus(str(tmp_path))
    assert excinfo.value.line == 3


def test_label_disagreeing_with_velocity_rejected(tmp_path, make_sequence):
    save_corpus([make_sequence(np.zeros(12))], str(tmp_path))
    corrupt_cell(str(tmp_path / "seq_00000.csv"), 4, 10, "slip")
    with pytest.raises(CorpusParseError) as excinfo:
        load_corpus(str(tmp_path))
    assert excinfo.value.line == 4


def test_load_single_record_file(tmp_path, make_sequence):
    seq = make_sequence(np.array([0] * 8 + [1] * 4), name="listed")
    save_corpus([seq], str(tmp_path))
    loaded = load_sequence_file(str(tmp_path / "seq_00000.csv"))
    assert loaded == seq
    assert loaded.name == "listed"


def test_parse_frame_rows():
    frame, label = parse_frame_row("0.01,1,2,3,4,5,6,0.05,0,0,slip", 2)
    assert frame.pressure == (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    assert label is ClassLabel.SLIP
    frame, label = parse_frame_row("0.02,1,2,3,4,5,6,0,0,0", 3)
    assert label is None
    with pytest.raises(CorpusParseError) as excinfo:
        parse_frame_row("0.02,1,2,3", 7)
    assert excinfo.value.line == 7


def test_read_frames_skips_header_and_blank_lines():
    text = "t,p0,p1,p2,p3,p4,p5,vx,vy,omega,label\n\n0,1,1,1,1,1,1,0,0,0,stable\n0.01,1,1,1,1,1,1,0,0,0,stable\n"
    rows = list(read_frames(io.StringIO(text)))
    assert [line for line, _, _ in rows] == [3, 4]


def test_corpus_summary_totals(small_corpus):
    summary = corpus_summary(small_corpus)
    assert summary.iloc[-1]["Total"] == pytest.approx(1.0)

#!/usr/bin/env python3
"""
Corpus Store - on-disk corpus format

A corpus is a directory holding
- manifest.json: format tag, format_version, sensor geometry, and one entry
  per sequence (record file, condition tag, barometer_range, frame count)
- one CSV record file per sequence: header line, then one row per frame
  `t,p0,p1,p2,p3,p4,p5,vx,vy,omega,label`

Reals are written as shortest round-trip decimals and read back with
round-trip parsing, so save/load is bit-exact. Files are UTF-8 with LF endings.
"""

import json
import logging
import math
import os
import re
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.errors import CorpusParseError, InvalidInputError, VersionError
from ..core.tactile_types import (
    GEOMETRY,
    NUM_CHANNELS,
    SAMPLE_RATE_HZ,
    ClassLabel,
    ConditionTag,
    LabeledSequence,
    Surface,
    TactileFrame,
    label_velocities,
)

logger = logging.getLogger(__name__)

CORPUS_MAGIC = "baroslip-corpus"
FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"

PRESSURE_COLUMNS = [f"p{i}" for i in range(NUM_CHANNELS)]
RECORD_COLUMNS = ["t"] + PRESSURE_COLUMNS + ["vx", "vy", "omega", "label"]
NUMERIC_COLUMNS = RECORD_COLUMNS[:-1]

_LINE_RE = re.compile(r"line (\d+)")


def _record_frame(seq: LabeledSequence) -> pd.DataFrame:
    data = {"t": seq.t}
    for i, col in enumerate(PRESSURE_COLUMNS):
        data[col] = seq.pressure[:, i]
    data["vx"] = seq.velocity[:, 0]
    data["vy"] = seq.velocity[:, 1]
    data["omega"] = seq.omega
    data["label"] = np.where(seq.labels == 1, ClassLabel.SLIP.text, ClassLabel.STABLE.text)
    return pd.DataFrame(data, columns=RECORD_COLUMNS)


def save_corpus(corpus: List[LabeledSequence], path: str) -> None:
    """
    Write a corpus directory

    Args:
        corpus: Sequences to write
        path: Target directory (created if missing)
    """
    os.makedirs(path, exist_ok=True)
    entries = []
    for i, seq in enumerate(corpus):
        file_name = f"seq_{i:05d}.csv"
        _record_frame(seq).to_csv(
            os.path.join(path, file_name), index=False, lineterminator="\n", encoding="utf-8"
        )
        entries.append(
            {
                "file": file_name,
                "name": seq.name,
                "frames": len(seq),
                "barometer_range": float(seq.barometer_range),
                "condition": seq.condition.to_dict(),
            }
        )
    manifest = {
        "format": CORPUS_MAGIC,
        "format_version": FORMAT_VERSION,
        "sensor_geometry": {"rows": GEOMETRY.rows, "cols": GEOMETRY.cols, "layout": GEOMETRY.layout()},
        "sample_rate": SAMPLE_RATE_HZ,
        "columns": RECORD_COLUMNS,
        "sequences": entries,
    }
    with open(os.path.join(path, MANIFEST_NAME), "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    logger.info(f"✅ Saved {len(corpus)} sequences to {path}")


def _read_manifest(path: str) -> Dict:
    manifest_path = os.path.join(path, MANIFEST_NAME)
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"❌ Malformed manifest {manifest_path}: {e}")
        raise CorpusParseError(f"invalid JSON: {e.msg}", path=manifest_path, line=e.lineno) from e
    if not isinstance(manifest, dict) or manifest.get("format") != CORPUS_MAGIC:
        raise CorpusParseError(f"not a corpus manifest (expected format '{CORPUS_MAGIC}')", path=manifest_path)
    version = manifest.get("format_version")
    if not isinstance(version, int):
        raise CorpusParseError("missing or non-integer format_version", path=manifest_path)
    if version != FORMAT_VERSION:
        raise VersionError(f"{manifest_path}: corpus format_version {version} not supported (expected {FORMAT_VERSION})")
    geometry = manifest.get("sensor_geometry", {})
    if geometry.get("layout") != GEOMETRY.layout():
        raise CorpusParseError(f"sensor layout {geometry.get('layout')} differs from {GEOMETRY.layout()}", path=manifest_path)
    return manifest


def _first_bad_row(file_path: str) -> Tuple[int, str]:
    """Locate the first unparsable numeric cell; returns (line number, message)"""
    raw = pd.read_csv(file_path, dtype=str, keep_default_na=False)
    for row_idx, row in enumerate(raw.itertuples(index=False), start=2):
        for col, value in zip(raw.columns, row):
            if col in NUMERIC_COLUMNS:
                try:
                    float(value)
                except (TypeError, ValueError):
                    return row_idx, f"column '{col}': cannot parse '{value}' as a number"
    return 0, "unparsable value"


def read_record_file(
    file_path: str,
    condition: ConditionTag,
    barometer_range: float,
    expected_frames: Optional[int] = None,
    name: str = "",
) -> LabeledSequence:
    """Parse one record CSV into a LabeledSequence"""
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            header = f.readline().rstrip("\n").split(",")
    except UnicodeDecodeError as e:
        raise CorpusParseError("file is not UTF-8", path=file_path) from e
    if header != RECORD_COLUMNS:
        raise CorpusParseError(f"header {header} differs from {RECORD_COLUMNS}", path=file_path, line=1)

    try:
        df = pd.read_csv(
            file_path,
            dtype={c: np.float64 for c in NUMERIC_COLUMNS} | {"label": str},
            float_precision="round_trip",
            keep_default_na=False,
            na_values=[],
        )
    except pd.errors.ParserError as e:
        match = _LINE_RE.search(str(e))
        line = int(match.group(1)) if match else None
        logger.error(f"❌ Malformed record file {file_path}: {e}")
        raise CorpusParseError(f"wrong field count: {e}", path=file_path, line=line) from e
    except ValueError as e:
        line, message = _first_bad_row(file_path)
        logger.error(f"❌ Malformed record file {file_path}: {message}")
        raise CorpusParseError(message, path=file_path, line=line or None) from e

    values = df[NUMERIC_COLUMNS].to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.all(np.isfinite(values), axis=1))
    if len(bad):
        raise CorpusParseError("non-finite value", path=file_path, line=int(bad[0]) + 2)
    if expected_frames is not None and len(df) != expected_frames:
        raise CorpusParseError(f"{len(df)} frames, manifest says {expected_frames}", path=file_path)

    label_text = df["label"].str.strip().str.lower()
    unknown = np.flatnonzero(~label_text.isin([ClassLabel.STABLE.text, ClassLabel.SLIP.text]).to_numpy())
    if len(unknown):
        raise CorpusParseError(f"unknown label '{df['label'].iloc[unknown[0]]}'", path=file_path, line=int(unknown[0]) + 2)
    labels = (label_text == ClassLabel.SLIP.text).to_numpy().astype(np.int8)

    velocity = values[:, 7:9].copy()
    omega = values[:, 9].copy()
    expected = label_velocities(velocity, omega)
    mismatch = np.flatnonzero(expected != labels)
    if len(mismatch):
        raise CorpusParseError("label disagrees with the velocity rule", path=file_path, line=int(mismatch[0]) + 2)

    return LabeledSequence(
        t=values[:, 0].copy(),
        pressure=values[:, 1:7].copy(),
        velocity=velocity,
        omega=omega,
        labels=labels,
        condition=condition,
        barometer_range=barometer_range,
        name=name,
    )


def load_corpus(path: str) -> List[LabeledSequence]:
    """
    Read a corpus directory written by save_corpus

    Raises:
        CorpusParseError: malformed manifest or record file (with file/line)
        VersionError: unsupported format_version
    """
    manifest = _read_manifest(path)
    corpus = []
    for k, entry in enumerate(manifest.get("sequences", [])):
        try:
            condition = ConditionTag.from_dict(entry["condition"])
            file_name = entry["file"]
            barometer_range = float(entry["barometer_range"])
        except (KeyError, TypeError, ValueError) as e:
            raise CorpusParseError(f"sequence entry {k} incomplete: {e}", path=os.path.join(path, MANIFEST_NAME)) from e
        corpus.append(
            read_record_file(
                os.path.join(path, file_name),
                condition,
                barometer_range,
                expected_frames=entry.get("frames"),
                name=entry.get("name", ""),
            )
        )
    logger.info(f"✅ Loaded {len(corpus)} sequences from {path}")
    return corpus


def load_sequence_file(file_path: str) -> LabeledSequence:
    """
    Read a single record file

    Condition and barometer range come from the sibling manifest when the
    file is listed there; otherwise a static planar tag and the default
    range are assumed.
    """
    directory, file_name = os.path.split(os.path.abspath(file_path))
    if os.path.exists(os.path.join(directory, MANIFEST_NAME)):
        manifest = _read_manifest(directory)
        for entry in manifest.get("sequences", []):
            if entry.get("file") == file_name:
                return read_record_file(
                    file_path,
                    ConditionTag.from_dict(entry["condition"]),
                    float(entry["barometer_range"]),
                    expected_frames=entry.get("frames"),
                    name=entry.get("name", ""),
                )
    logger.warning(f"⚠️ {file_path} not listed in a manifest; condition unknown")
    return read_record_file(file_path, ConditionTag.static(Surface.PLANAR), 1000.0, name=file_name)


def parse_frame_row(text: str, line_no: int) -> Tuple[TactileFrame, Optional[ClassLabel]]:
    """
    Parse one record-format row (the stdin streaming format)

    The trailing label column is optional.

    Returns:
        (frame, label or None)
    """
    cells = [c.strip() for c in text.strip().split(",")]
    if len(cells) not in (len(NUMERIC_COLUMNS), len(RECORD_COLUMNS)):
        raise CorpusParseError(
            f"expected {len(NUMERIC_COLUMNS)} or {len(RECORD_COLUMNS)} fields, got {len(cells)}", path="<stream>", line=line_no
        )
    try:
        numbers = [float(c) for c in cells[: len(NUMERIC_COLUMNS)]]
    except ValueError as e:
        raise CorpusParseError(f"non-numeric field: {e}", path="<stream>", line=line_no) from e
    if not all(math.isfinite(v) for v in numbers):
        raise CorpusParseError("non-finite value", path="<stream>", line=line_no)
    try:
        label = ClassLabel.from_text(cells[-1]) if len(cells) == len(RECORD_COLUMNS) else None
        frame = TactileFrame(
            t=numbers[0], pressure=tuple(numbers[1:7]), v_xy=(numbers[7], numbers[8]), omega=numbers[9]
        )
    except InvalidInputError as e:
        raise CorpusParseError(str(e), path="<stream>", line=line_no) from e
    return frame, label


def read_frames(stream):
    """Yield (line_no, frame, label) from a text stream, skipping blank and header lines"""
    for line_no, text in enumerate(stream, start=1):
        if not text.strip() or text.startswith(RECORD_COLUMNS[0] + ","):
            continue
        frame, label = parse_frame_row(text, line_no)
        yield line_no, frame, label


def corpus_summary(corpus: List[LabeledSequence]) -> pd.DataFrame:
    """Slip-frame share per condition cell, laid out as the condition table with totals"""
    from ..simulation.condition_grid import shares_table
    from ..simulation.signal_generator import slip_frame_shares

    return shares_table(slip_frame_shares(corpus))

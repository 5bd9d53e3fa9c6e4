#!/usr/bin/env python3
"""
Model file store

Layout:
    line 1   BAROSLIP-MODEL
    line 2   one-line JSON manifest (format_version, kind, architecture,
             input_scale, training, parameters[{name, shape, offset, count}],
             block_bytes)
    rest     raw little-endian float64 parameter block, parameters laid out
             back to back at the manifest offsets (in values)
"""

import json
import logging
from typing import Dict, Union

import numpy as np

from ..core.errors import ModelLoadError, VersionError
from .base import Classifier, NeuralClassifier
from .freq_cnn import FreqCnnModel
from .psd_detector import PsdDetector
from .tcn import TcnArchitecture, TcnModel

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"BAROSLIP-MODEL"
MODEL_FORMAT_VERSION = 1
_DTYPE = np.dtype("<f8")

AnyModel = Union[TcnModel, FreqCnnModel, PsdDetector]


def _manifest(model: Classifier) -> Dict:
    manifest = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "architecture": model.architecture(),
        "dtype": "float64",
        "byte_order": "little",
        "input_scale": model.input_scale if isinstance(model, NeuralClassifier) else 1.0,
        "training": model.training_manifest,
    }
    return manifest


def save_model(model: Classifier, path: str) -> None:
    """Write a model file; the write is byte-deterministic for a given model"""
    manifest = _manifest(model)
    entries = []
    chunks = []
    offset = 0
    if isinstance(model, NeuralClassifier):
        for name, value in model.parameters().items():
            entries.append({"name": name, "shape": list(value.shape), "offset": offset, "count": int(value.size)})
            chunks.append(np.ascontiguousarray(value, dtype=_DTYPE).tobytes())
            offset += int(value.size)
    block = b"".join(chunks)
    manifest["parameters"] = entries
    manifest["block_bytes"] = len(block)

    header = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(MODEL_MAGIC + b"\n" + header + b"\n" + block)
    except OSError as e:
        logger.error(f"❌ Error writing model file {path}: {e}")
        raise
    logger.info(f"✅ Saved {model.kind} model ({offset} parameters) to {path}")


def _require(manifest: Dict, key: str):
    if key not in manifest:
        raise ModelLoadError(f"Manifest lacks '{key}'", field=key)
    return manifest[key]


def _build(kind: str, architecture: Dict, input_scale: float) -> AnyModel:
    try:
        if kind == TcnModel.kind:
            return TcnModel(TcnArchitecture.from_dict(architecture), input_scale=input_scale)
        if kind == FreqCnnModel.kind:
            return FreqCnnModel(
                T_k=int(architecture["T_k"]),
                conv_channels=architecture["conv_channels"],
                fc_size=int(architecture["fc_size"]),
                dropout_rate=float(architecture["dropout_rate"]),
                kernel_size=int(architecture["kernel_size"]),
                input_scale=input_scale,
            )
        if kind == PsdDetector.kind:
            return PsdDetector.from_architecture(architecture)
    except KeyError as e:
        raise ModelLoadError(f"Architecture lacks {e}", field=f"architecture.{e.args[0]}") from e
    raise ModelLoadError(f"Unknown model kind '{kind}'", field="kind")


def load_model(path: str) -> AnyModel:
    """
    Read a model file written by save_model

    Raises:
        ModelLoadError: bad magic, malformed manifest, missing or mismatched field, truncated block
        VersionError: format_version other than 1
    """
    with open(path, "rb") as fh:
        raw = fh.read()

    first = raw.find(b"\n")
    second = raw.find(b"\n", first + 1) if first >= 0 else -1
    if first < 0 or raw[:first] != MODEL_MAGIC:
        raise ModelLoadError(f"{path} is not a baroslip model file", field="magic")
    if second < 0:
        raise ModelLoadError(f"{path} has no manifest line", field="manifest")
    try:
        manifest = json.loads(raw[first + 1:second].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelLoadError(f"Malformed manifest in {path}: {e}", field="manifest") from e
    if not isinstance(manifest, dict):
        raise ModelLoadError("Manifest is not a JSON object", field="manifest")

    version = _require(manifest, "format_version")
    if version != MODEL_FORMAT_VERSION:
        raise VersionError(f"Model format_version {version} unsupported (expected {MODEL_FORMAT_VERSION})")

    kind = _require(manifest, "kind")
    model = _build(kind, _require(manifest, "architecture"), float(manifest.get("input_scale", 1.0)))

    block = raw[second + 1:]
    expected_bytes = int(_require(manifest, "block_bytes"))
    if len(block) != expected_bytes:
        raise ModelLoadError(
            f"Parameter block holds {len(block)} bytes, manifest says {expected_bytes}", field="block_bytes"
        )
    values = np.frombuffer(block, dtype=_DTYPE)

    if isinstance(model, NeuralClassifier):
        entries = {entry["name"]: entry for entry in _require(manifest, "parameters")}
        for name, target in model.parameters().items():
            entry = entries.pop(name, None)
            if entry is None:
                raise ModelLoadError(f"Parameter '{name}' missing from manifest", field=name)
            if tuple(entry["shape"]) != target.shape or entry["count"] != target.size:
                raise ModelLoadError(f"Parameter '{name}' shape {entry['shape']} != {list(target.shape)}", field=name)
            start = int(entry["offset"])
            if start < 0 or start + target.size > values.size:
                raise ModelLoadError(f"Parameter '{name}' lies outside the block", field=name)
            target[...] = values[start:start + target.size].reshape(target.shape)
        if entries:
            extra = sorted(entries)[0]
            raise ModelLoadError(f"Unexpected parameter '{extra}' for {kind}", field=extra)
    model.training_manifest = manifest.get("training", {})

    logger.info(f"✅ Loaded {kind} model from {path}")
    return model

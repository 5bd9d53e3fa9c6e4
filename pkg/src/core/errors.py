#!/usr/bin/env python3
"""
Error types shared across the slip-detection pipeline

Everything derives from ValueError so callers that already guard
`except ValueError` keep working.
"""

from typing import Optional


class BaroslipError(ValueError):
    """Base class for all pipeline errors"""


class InvalidInputError(BaroslipError):
    """Non-finite values or unknown enum names"""


class WindowRangeError(BaroslipError):
    """A window reaches outside its sequence"""


class ConfigError(BaroslipError):
    """Invalid simulator / training configuration or condition tag"""


class GenerationError(BaroslipError):
    """A grid fraction cannot be reached with the configured durations"""


class ShapeError(BaroslipError):
    """Array shapes disagree"""


class BalanceError(BaroslipError):
    """Class balancing needs both classes"""


class FitError(BaroslipError):
    """Threshold fitting needs both classes"""


class StreamError(BaroslipError):
    """Frames arrived out of time order"""


class VersionError(BaroslipError):
    """Unsupported file format_version"""


class CorpusParseError(BaroslipError):
    """Malformed corpus file"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class ModelLoadError(BaroslipError):
    """Model file does not match what the loader expects"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        prefix = f"[{field}] " if field else ""
        super().__init__(f"{prefix}{message}")


class TrainingDivergenceError(BaroslipError):
    """Loss became NaN/Inf during training"""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"Training diverged at epoch {epoch} (loss={loss})")

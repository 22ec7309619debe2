"""Custom exceptions for the phase segmentation engine."""

from typing import Optional, Dict, Any, Sequence


class PhaseSegError(Exception):
    """Base exception for the phase segmentation engine."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(PhaseSegError):
    """Raised when there are configuration issues."""
    pass


class ParameterError(PhaseSegError):
    """Raised when an operation receives an out-of-range parameter."""
    pass


class DimensionError(PhaseSegError):
    """Raised when tensor or sequence shapes do not agree."""

    def __init__(
        self,
        message: str,
        expected: Optional[Sequence[int]] = None,
        actual: Optional[Sequence[int]] = None,
    ):
        super().__init__(message, {"expected": expected, "actual": actual})
        self.expected = tuple(expected) if expected is not None else None
        self.actual = tuple(actual) if actual is not None else None


class EmptyInputError(PhaseSegError):
    """Raised when a sequence with no frames reaches an operation that needs one."""
    pass


class NonFiniteError(PhaseSegError):
    """Raised when NaN or Inf shows up in a forward or backward pass."""

    def __init__(self, message: str, op: Optional[str] = None):
        super().__init__(message, {"op": op})
        self.op = op


class DataError(PhaseSegError):
    """Raised when labels, frames or dataset entries are invalid."""

    def __init__(self, message: str, index: Optional[int] = None, field: Optional[str] = None):
        super().__init__(message, {"index": index, "field": field})
        self.index = index
        self.field = field


class FormatError(PhaseSegError):
    """Raised when a binary file is malformed."""

    def __init__(self, message: str, offset: int, path: Optional[str] = None):
        super().__init__(f"{message} (byte offset {offset})", {"offset": offset, "path": path})
        self.offset = offset
        self.path = path


class GenerationError(PhaseSegError):
    """Raised when a workflow cannot produce the requested sequence."""
    pass


class TrainingError(PhaseSegError):
    """Raised when optimization has to stop."""

    def __init__(self, message: str, epoch: Optional[int] = None, video_id: Optional[str] = None):
        super().__init__(message, {"epoch": epoch, "video_id": video_id})
        self.epoch = epoch
        self.video_id = video_id

"""Feature and label file formats.

PHSF feature files (little-endian)::

    0   4  magic b"PHSF"
    4   4  u32 version (1)
    8   4  u32 T, number of frames
    12  4  u32 D, features per frame
    16     T * D float32, row-major

Label files hold one integer per line, one line per frame.
"""

import struct
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from ..models.sequences import PhaseSequence
from ..utils.exceptions import DataError, FormatError
from .features import FEATURE_DTYPE, FeatureSequence

MAGIC = b"PHSF"
VERSION = 1
HEADER = struct.Struct("<4sIII")

PathLike = Union[str, Path]


def encode_features(seq: Union[FeatureSequence, np.ndarray]) -> bytes:
    data = seq.data if isinstance(seq, FeatureSequence) else np.asarray(seq)
    if data.ndim != 2:
        raise DataError(f"Features must be a (T, D) matrix, got shape {data.shape}", field="features")
    length, dim = data.shape
    return HEADER.pack(MAGIC, VERSION, length, dim) + np.ascontiguousarray(data, dtype="<f4").tobytes()


def _parse_header(blob: bytes, path: Optional[str]):
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise FormatError("Not a PHSF feature file: bad magic", offset=0, path=path)
    if len(blob) < HEADER.size:
        raise FormatError("Truncated PHSF header", offset=len(blob), path=path)
    _, version, length, dim = HEADER.unpack_from(blob, 0)
    if version != VERSION:
        raise FormatError(f"Unsupported PHSF version {version}", offset=4, path=path)
    if dim == 0:
        raise FormatError("PHSF feature dimension is 0", offset=12, path=path)
    return length, dim


def decode_features(blob: bytes, path: Optional[str] = None) -> FeatureSequence:
    length, dim = _parse_header(blob, path)
    expected = HEADER.size + 4 * length * dim
    if len(blob) < expected:
        raise FormatError(
            f"Truncated PHSF body: {length}x{dim} values need {expected} bytes, file has {len(blob)}",
            offset=len(blob),
            path=path,
        )
    if len(blob) > expected:
        raise FormatError("Trailing bytes after PHSF body", offset=expected, path=path)
    if length == 0:
        return FeatureSequence(np.empty((0, dim), dtype=FEATURE_DTYPE), source="external")
    data = np.frombuffer(blob, dtype="<f4", count=length * dim, offset=HEADER.size)
    return FeatureSequence(data.reshape(length, dim).astype(FEATURE_DTYPE), source="external")


def save_features(seq: Union[FeatureSequence, np.ndarray], path: PathLike) -> Path:
    path = Path(path)
    path.write_bytes(encode_features(seq))
    return path


def load_features(path: PathLike) -> FeatureSequence:
    """Read a PHSF file; malformed files raise FormatError with the byte offset."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read feature file: {e}", offset=0, path=str(path))
    return decode_features(blob, path=str(path))


def load_features_csv(path: PathLike, delimiter: str = ",") -> FeatureSequence:
    """Read a comma-separated (T, D) matrix, one frame per row."""
    try:
        data = np.loadtxt(path, delimiter=delimiter, dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        raise DataError(f"Cannot parse feature CSV {path}: {e}", field="features")
    if data.size == 0:
        data = np.empty((0, 0))
    return FeatureSequence(data.astype(FEATURE_DTYPE), source="external")


def iter_feature_frames(path: PathLike) -> Iterator[np.ndarray]:
    """Yield PHSF frames one by one without reading the whole body.

    A short or non-finite frame raises DataError naming its index.
    """
    path = Path(path)
    with open(path, "rb") as handle:
        head = handle.read(HEADER.size)
        length, dim = _parse_header(head, str(path))
        frame_bytes = 4 * dim
        for index in range(length):
            chunk = handle.read(frame_bytes)
            if len(chunk) != frame_bytes:
                raise DataError(
                    f"Frame {index} is truncated: {len(chunk)} of {frame_bytes} bytes "
                    f"(byte offset {HEADER.size + index * frame_bytes})",
                    index=index,
                    field="frame",
                )
            frame = np.frombuffer(chunk, dtype="<f4").astype(FEATURE_DTYPE)
            if not np.isfinite(frame).all():
                raise DataError(f"Frame {index} has non-finite values", index=index, field="frame")
            yield frame


def iter_csv_rows(lines: Iterable[str], delimiter: str = ",") -> Iterator[np.ndarray]:
    """Parse text lines into frames as they arrive; blank lines are skipped."""
    dim = None
    index = 0
    for line in lines:
        if not line.strip():
            continue
        try:
            frame = np.array([float(v) for v in line.strip().split(delimiter)], dtype=FEATURE_DTYPE)
        except ValueError as e:
            raise DataError(f"Frame {index} is malformed: {e}", index=index, field="frame")
        if dim is None:
            dim = frame.size
        elif frame.size != dim:
            raise DataError(f"Frame {index} has {frame.size} values, expected {dim}", index=index, field="frame")
        if not np.isfinite(frame).all():
            raise DataError(f"Frame {index} has non-finite values", index=index, field="frame")
        yield frame
        index += 1


def iter_csv_frames(path: PathLike, delimiter: str = ",") -> Iterator[np.ndarray]:
    with open(path, "r", encoding="utf-8") as handle:
        yield from iter_csv_rows(handle, delimiter)


def iter_frames(path: PathLike) -> Iterator[np.ndarray]:
    """Frames of a PHSF or CSV file, chosen by extension."""
    if Path(path).suffix.lower() in (".csv", ".txt"):
        return iter_csv_frames(path)
    return iter_feature_frames(path)


def format_labels(labels) -> str:
    values = labels.labels if isinstance(labels, PhaseSequence) else np.asarray(labels, dtype=np.int64)
    return "".join(f"{int(v)}\n" for v in values)


def save_labels(labels, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(format_labels(labels), encoding="utf-8")
    return path


def read_label_values(path: PathLike) -> np.ndarray:
    """Raw integer labels of a label file, unchecked against any class count."""
    values = []
    with open(path, "r", encoding="utf-8") as handle:
        for index, line in enumerate(handle):
            text = line.strip()
            try:
                values.append(int(text))
            except ValueError:
                raise DataError(f"Line {index + 1} of {path} is not an integer label: {text!r}", index=index)
    return np.asarray(values, dtype=np.int64)


def load_labels(path: PathLike, num_classes: int) -> PhaseSequence:
    """Read one integer label per line."""
    return PhaseSequence(read_label_values(path), num_classes)

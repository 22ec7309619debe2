"""Binary checkpoint format.

Layout (little-endian)::

    0   4  magic b"PSEG"
    4   4  u32 format version
    8   4  u32 header length H
    12  H  UTF-8 JSON header (sorted keys)
    12+H 8 u64 scalar count N
    20+H   N float32 parameter values, module order
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..config.settings import ModelConfig
from ..utils.exceptions import FormatError
from ..utils.logging import get_logger
from .model import CausalPhaseModel


logger = get_logger(__name__)

MAGIC = b"PSEG"
VERSION = 1
HEADER_OFFSET = 12


def encode_checkpoint(model: CausalPhaseModel, metadata: Optional[Dict[str, Any]] = None) -> bytes:
    """Serialize model config, parameters and run metadata."""
    names = [(name, list(p.shape)) for name, p in model.named_parameters()]
    header = {
        "format": "phaseseg-checkpoint",
        "model": model.cfg.model_dump(mode="json"),
        "seed": model.seed,
        "parameters": [{"name": n, "shape": s} for n, s in names],
    }
    header.update(metadata or {})
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    body = np.concatenate([p.data.reshape(-1).astype("<f4") for p in model.parameters()])
    return b"".join([
        MAGIC,
        struct.pack("<II", VERSION, len(header_bytes)),
        header_bytes,
        struct.pack("<Q", body.size),
        body.tobytes(),
    ])


def _header_config(header: Any, path: Optional[str]) -> ModelConfig:
    """Model config from a parsed header; anything malformed is a format error at the header."""
    if not isinstance(header, dict):
        raise FormatError("Checkpoint header is not a JSON object", offset=HEADER_OFFSET, path=path)
    missing = [key for key in ("model", "parameters") if key not in header]
    if missing:
        raise FormatError(f"Checkpoint header lacks {missing}", offset=HEADER_OFFSET, path=path)
    if not isinstance(header["parameters"], list) or not all(
        isinstance(p, dict) and "name" in p and "shape" in p for p in header["parameters"]
    ):
        raise FormatError("Checkpoint header has a malformed parameter table", offset=HEADER_OFFSET, path=path)
    try:
        return ModelConfig(**header["model"])
    except (TypeError, ValidationError) as e:
        raise FormatError(f"Checkpoint header has an invalid model config: {e}", offset=HEADER_OFFSET, path=path)


def decode_checkpoint(
    blob: bytes,
    path: Optional[str] = None,
    dtype: Optional[str] = None,
) -> Tuple[CausalPhaseModel, Dict[str, Any]]:
    """Rebuild the model and return it with the parsed header."""
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise FormatError("Not a checkpoint: bad magic", offset=0, path=path)
    if len(blob) < 12:
        raise FormatError("Truncated checkpoint header", offset=len(blob), path=path)
    version, header_len = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise FormatError(f"Unsupported checkpoint version {version}", offset=4, path=path)
    if len(blob) < 12 + header_len + 8:
        raise FormatError("Truncated checkpoint header", offset=len(blob), path=path)
    try:
        header = json.loads(blob[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"Checkpoint header is not valid JSON: {e}", offset=HEADER_OFFSET, path=path)

    count_offset = 12 + header_len
    (count,) = struct.unpack_from("<Q", blob, count_offset)
    body_offset = count_offset + 8
    expected_end = body_offset + 4 * count
    if len(blob) < expected_end:
        raise FormatError(
            f"Truncated checkpoint body: {count} values need {expected_end} bytes, file has {len(blob)}",
            offset=len(blob),
            path=path,
        )
    if len(blob) > expected_end:
        raise FormatError("Trailing bytes after checkpoint body", offset=expected_end, path=path)

    cfg = _header_config(header, path)
    if dtype is not None:
        cfg = cfg.model_copy(update={"dtype": dtype})
    model = CausalPhaseModel(cfg, seed=header.get("seed", 0))

    declared = sum(int(np.prod(p["shape"])) for p in header["parameters"])
    if declared != count or count != model.num_scalars():
        raise FormatError(
            f"Checkpoint holds {count} values, header declares {declared}, model needs {model.num_scalars()}",
            offset=count_offset,
            path=path,
        )

    values = np.frombuffer(blob, dtype="<f4", count=count, offset=body_offset)
    arrays, cursor = {}, 0
    for entry in header["parameters"]:
        size = int(np.prod(entry["shape"]))
        arrays[entry["name"]] = values[cursor:cursor + size].reshape(entry["shape"])
        cursor += size
    model.load_parameters(arrays)
    return model, header


def save_checkpoint(
    path: Union[str, Path],
    model: CausalPhaseModel,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model, metadata))
    logger.debug("Saved checkpoint", path=str(path), scalars=model.num_scalars())
    return path


def load_checkpoint(
    path: Union[str, Path],
    dtype: Optional[str] = None,
) -> Tuple[CausalPhaseModel, Dict[str, Any]]:
    """Load a checkpoint; ``dtype`` overrides the stored model precision."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise FormatError(f"Cannot read checkpoint: {e}", offset=0, path=str(path))
    return decode_checkpoint(blob, path=str(path), dtype=dtype)

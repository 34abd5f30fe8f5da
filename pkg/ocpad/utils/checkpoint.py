"""
Autoencoder checkpoint framing.

Layout (little-endian): magic "OCAE", u16 version, u32 header length,
UTF-8 JSON header, then every parameter as float32 in layer order
(weight before bias).
"""

import logging
import struct
from pathlib import Path
from typing import Iterable, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ocpad.errors import DataContractError, FormatError
from ocpad.schemas.checkpoint import CheckpointHeader

logger = logging.getLogger(__name__)

MAGIC = b"OCAE"
VERSION = 1
PREAMBLE = struct.Struct("<4sHI")


def encode_checkpoint(header: CheckpointHeader, arrays: Iterable[np.ndarray]) -> bytes:
    header_bytes = header.model_dump_json().encode("utf-8")
    payload = b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes() for a in arrays)
    if len(payload) != 4 * header.parameter_count:
        raise FormatError(f"payload holds {len(payload) // 4} values, header declares {header.parameter_count}")
    return PREAMBLE.pack(MAGIC, VERSION, len(header_bytes)) + header_bytes + payload


def decode_checkpoint(blob: bytes) -> Tuple[CheckpointHeader, np.ndarray]:
    """
    Header plus the flat float32 parameter vector.
    """
    if len(blob) < PREAMBLE.size:
        raise FormatError(f"checkpoint truncated: {len(blob)} bytes")
    magic, version, header_len = PREAMBLE.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad checkpoint magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    start = PREAMBLE.size + header_len
    if len(blob) < start:
        raise FormatError("checkpoint truncated inside its header")
    try:
        header = CheckpointHeader.model_validate_json(blob[PREAMBLE.size:start])
    except ValidationError as exc:
        raise FormatError(f"invalid checkpoint header: {exc.error_count()} errors") from exc

    expected = start + 4 * header.parameter_count
    if len(blob) != expected:
        kind = "truncated" if len(blob) < expected else "oversized"
        raise FormatError(f"checkpoint {kind}: {len(blob)} bytes, expected {expected}")
    values = np.frombuffer(blob, dtype="<f4", offset=start).astype(np.float32)
    return header, values


def write_checkpoint(path: Union[str, Path], header: CheckpointHeader, arrays: Iterable[np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(header, arrays))
    logger.debug(f"Wrote checkpoint {path}")
    return path


def read_checkpoint(path: Union[str, Path]) -> Tuple[CheckpointHeader, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise DataContractError(f"checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes())

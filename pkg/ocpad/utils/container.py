"""
Binary container for SampleSets.

Layout (little-endian):
    28-byte header   magic "OCPD", u16 version, u8 flags, pad, u32 N,
                     u16 d, u16 H, u16 W, pad, u64 metadata length
    metadata         UTF-8, one "sample_id<TAB>subject_id<TAB>label<TAB>species" line per sample
    data             N*d*H*W float32, sample-major then channel-major
"""

import hashlib
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ocpad.errors import DataContractError, FormatError
from ocpad.models.sample_set import SampleSet

logger = logging.getLogger(__name__)

MAGIC = b"OCPD"
VERSION = 1
HEADER = struct.Struct("<4sHBxIHHH2xQ")
FLAG_ATTACKS = 0x01

_U16_MAX = 0xFFFF
_U32_MAX = 0xFFFFFFFF


def encode_container(samples: SampleSet) -> bytes:
    n, d, h, w = samples.images.shape
    if n > _U32_MAX or max(d, h, w) > _U16_MAX:
        raise FormatError(f"dimensions {samples.images.shape} overflow the container header")
    lines = []
    for row in zip(samples.sample_ids, samples.subject_ids, samples.labels, samples.species):
        if any("\t" in v or "\n" in v for v in row):
            raise FormatError(f"metadata field of sample {row[0]!r} contains a tab or newline")
        lines.append("\t".join(row) + "\n")
    metadata = "".join(lines).encode("utf-8")
    flags = FLAG_ATTACKS if samples.has_attacks() else 0
    header = HEADER.pack(MAGIC, VERSION, flags, n, d, h, w, len(metadata))
    return header + metadata + samples.images.astype("<f4").tobytes()


def decode_container(blob: bytes) -> SampleSet:
    if len(blob) < HEADER.size:
        raise FormatError(f"container truncated: {len(blob)} bytes, header needs {HEADER.size}")
    magic, version, flags, n, d, h, w, meta_len = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad container magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")

    data_len = n * d * h * w * 4
    expected = HEADER.size + meta_len + data_len
    if len(blob) < expected:
        raise FormatError(f"container truncated: {len(blob)} bytes, expected {expected}")
    if len(blob) > expected:
        raise FormatError(f"container has {len(blob) - expected} trailing bytes")

    try:
        text = blob[HEADER.size:HEADER.size + meta_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"container metadata is not UTF-8: {exc}") from exc
    lines = text.split("\n")
    if lines[-1] != "":
        raise FormatError("container metadata does not end with a newline")
    rows = [line.split("\t") for line in lines[:-1]]
    if len(rows) != n or any(len(row) != 4 for row in rows):
        raise FormatError(f"container metadata has {len(rows)} records for {n} samples")

    images = np.frombuffer(blob, dtype="<f4", count=n * d * h * w, offset=HEADER.size + meta_len)
    try:
        samples = SampleSet(
            images=images.reshape(n, d, h, w).astype(np.float32),
            sample_ids=[r[0] for r in rows],
            subject_ids=[r[1] for r in rows],
            labels=[r[2] for r in rows],
            species=[r[3] for r in rows],
        )
    except DataContractError as exc:
        raise FormatError(f"container content invalid: {exc.detail}") from exc
    if bool(flags & FLAG_ATTACKS) != samples.has_attacks():
        raise FormatError("container attack flag disagrees with its labels")
    return samples


def save_container(samples: SampleSet, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_container(samples))
    logger.debug(f"Wrote {len(samples)} samples to {path}")
    return path


def load_container(path: Union[str, Path]) -> SampleSet:
    path = Path(path)
    if not path.is_file():
        raise DataContractError(f"container not found: {path}")
    return decode_container(path.read_bytes())


def file_checksum(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

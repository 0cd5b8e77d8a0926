"""Binary checkpoint files.

Layout (little-endian)::

    b"HGCK"  u16 version
    u32 config_len   config_len bytes of UTF-8 JSON
    u32 count
    count x ( u16 path_len  path  u8 dtype_tag  u8 ndim  ndim x u32 dim  raw scalars )

dtype_tag 0 stores float64, 1 stores float32. Arrays always load back as float64.
"""

from __future__ import annotations

import json
import logging
import os
import struct
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from hierground.errors import CheckpointError

logger = logging.getLogger("hierground.autodiff.checkpoint")

MAGIC = b"HGCK"
VERSION = 1

_DTYPES = {"float64": (0, np.dtype("<f8")), "float32": (1, np.dtype("<f4"))}
_TAGS = {tag: dt for tag, dt in _DTYPES.values()}


@dataclass
class Checkpoint:
    version: int
    config: dict[str, Any] = field(default_factory=dict)
    arrays: dict[str, np.ndarray] = field(default_factory=dict)


def encode_checkpoint(
    arrays: Mapping[str, np.ndarray],
    config: Mapping[str, Any] | None = None,
    dtype: str = "float64",
) -> bytes:
    if dtype not in _DTYPES:
        raise CheckpointError(f"unsupported checkpoint dtype {dtype!r}; expected one of {sorted(_DTYPES)}")
    tag, np_dtype = _DTYPES[dtype]
    config_bytes = json.dumps(dict(config or {}), sort_keys=True).encode("utf-8")

    parts = [MAGIC, struct.pack("<H", VERSION), struct.pack("<I", len(config_bytes)), config_bytes]
    parts.append(struct.pack("<I", len(arrays)))
    for path in sorted(arrays):
        arr = np.ascontiguousarray(np.asarray(arrays[path]), dtype=np_dtype)
        path_bytes = path.encode("utf-8")
        parts.append(struct.pack("<H", len(path_bytes)))
        parts.append(path_bytes)
        parts.append(struct.pack("<BB", tag, arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def decode_checkpoint(payload: bytes) -> Checkpoint:
    offset = 0

    def take(n: int) -> bytes:
        nonlocal offset
        if offset + n > len(payload):
            raise CheckpointError(f"checkpoint truncated at byte {offset} (needed {n} more)")
        chunk = payload[offset : offset + n]
        offset += n
        return chunk

    if take(4) != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    (version,) = struct.unpack("<H", take(2))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (config_len,) = struct.unpack("<I", take(4))
    try:
        config = json.loads(take(config_len).decode("utf-8")) if config_len else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"embedded config is not valid JSON: {e}") from e

    (count,) = struct.unpack("<I", take(4))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (path_len,) = struct.unpack("<H", take(2))
        path = take(path_len).decode("utf-8")
        tag, ndim = struct.unpack("<BB", take(2))
        if tag not in _TAGS:
            raise CheckpointError(f"unknown dtype tag {tag} for {path}")
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        np_dtype = _TAGS[tag]
        n = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        raw = take(n * np_dtype.itemsize)
        arrays[path] = np.frombuffer(raw, dtype=np_dtype).reshape(shape).astype(np.float64)
    if offset != len(payload):
        raise CheckpointError(f"{len(payload) - offset} trailing bytes after last entry")
    return Checkpoint(version=version, config=config, arrays=arrays)


def save_checkpoint(
    path: str,
    arrays: Mapping[str, np.ndarray],
    config: Mapping[str, Any] | None = None,
    dtype: str = "float64",
) -> str:
    """Write a checkpoint atomically (temp file + rename)."""
    payload = encode_checkpoint(arrays, config, dtype)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    logger.debug("wrote %s (%d arrays, %d bytes)", path, len(arrays), len(payload))
    return path


def load_checkpoint(path: str) -> Checkpoint:
    try:
        with open(path, "rb") as f:
            payload = f.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    return decode_checkpoint(payload)

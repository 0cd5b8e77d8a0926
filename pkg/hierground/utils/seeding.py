"""Named random substreams derived from one run seed."""

from __future__ import annotations

import zlib

import numpy as np

DATA = "data"
INIT = "init"
SHUFFLE = "shuffle"


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for ``name``; identical (seed, name) pairs replay exactly."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode("utf-8"))])

"""Binary PPM (P6) and PGM (P5) files."""

from __future__ import annotations

import numpy as np

from hierground.errors import InputError


def encode_pgm(gray: np.ndarray) -> bytes:
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise InputError(f"PGM needs a 2-D uint8 array, got {gray.dtype} {gray.shape}")
    h, w = gray.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes(order="C")


def encode_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise InputError(f"PPM needs an (h, w, 3) uint8 array, got {rgb.dtype} {rgb.shape}")
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes(order="C")


def write_pgm(path: str, gray: np.ndarray) -> str:
    with open(path, "wb") as f:
        f.write(encode_pgm(gray))
    return path


def write_ppm(path: str, rgb: np.ndarray) -> str:
    with open(path, "wb") as f:
        f.write(encode_ppm(rgb))
    return path


def _parse_header(payload: bytes, magic: bytes) -> tuple[int, int, int]:
    fields: list[bytes] = []
    offset = 0
    while len(fields) < 4:
        while offset < len(payload) and payload[offset : offset + 1].isspace():
            offset += 1
        if payload[offset : offset + 1] == b"#":
            offset = payload.index(b"\n", offset) + 1
            continue
        start = offset
        while offset < len(payload) and not payload[offset : offset + 1].isspace():
            offset += 1
        if start == offset:
            raise InputError("truncated netpbm header")
        fields.append(payload[start:offset])
    if fields[0] != magic:
        raise InputError(f"expected {magic.decode()} image, found {fields[0][:2]!r}")
    width, height, maxval = (int(v) for v in fields[1:])
    if maxval != 255:
        raise InputError(f"only 8-bit netpbm images are supported (maxval {maxval})")
    return width, height, offset + 1


def decode_ppm(payload: bytes) -> np.ndarray:
    width, height, offset = _parse_header(payload, b"P6")
    raw = payload[offset : offset + width * height * 3]
    if len(raw) != width * height * 3:
        raise InputError("truncated PPM pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()


def decode_pgm(payload: bytes) -> np.ndarray:
    width, height, offset = _parse_header(payload, b"P5")
    raw = payload[offset : offset + width * height]
    if len(raw) != width * height:
        raise InputError("truncated PGM pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width).copy()


def read_ppm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_ppm(f.read())


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_pgm(f.read())

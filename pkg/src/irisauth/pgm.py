"""Binary PGM (P5, maxval 255) reader/writer."""

from __future__ import annotations

import numpy as np

from .errors import BadImageFile
from .imaging import GrayImage

__all__ = ["read_pgm", "write_pgm"]


def _read_tokens(data: bytes, count: int):
    """Yield `count` whitespace-separated header tokens, skipping # comments.
    Returns (tokens, offset of first byte after the final token's delimiter)."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise BadImageFile("truncated PGM header")
        tokens.append(data[start:i])
    # exactly one whitespace byte separates the header from the raster
    return tokens, i + 1


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        raise BadImageFile(f"{path}: not a binary PGM (P5) file")
    try:
        (_, w, h, maxval), offset = _read_tokens(data, 4)
        width, height, maxval = int(w), int(h), int(maxval)
    except (ValueError, BadImageFile) as exc:
        raise BadImageFile(f"{path}: bad PGM header ({exc})") from exc
    if maxval != 255:
        raise BadImageFile(f"{path}: only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise BadImageFile(f"{path}: bad dimensions {width}x{height}")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise BadImageFile(f"{path}: raster truncated")
    return GrayImage(np.frombuffer(raster, dtype=np.uint8).reshape(height, width))


def write_pgm(path, img: GrayImage) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.pixels.tobytes())

"""
Raster files: 8-bit PNG for colour renders and masks, 16-bit binary PGM for
depth in millimetres.
"""

import logging

import numpy as np
from PIL import Image

from shakingbot_sim.perception.models import MAX_DEPTH, BoolArray, ByteArray, FloatArray
from shakingbot_sim.utils.file_utils import PathLike, ensure_parent_dir

logger = logging.getLogger(__name__)

PGM_MAGIC = b"P5"
PGM_MAXVAL = 65535
MM_PER_M = 1000.0


def write_png(rgb: ByteArray, path: PathLike) -> None:
    target = ensure_parent_dir(path)
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8)).save(target, "PNG")


def read_png(path: PathLike) -> ByteArray:
    with Image.open(path) as image:
        return np.asarray(image.convert("RGB"), dtype=np.uint8).copy()


def write_mask_png(mask: BoolArray, path: PathLike) -> None:
    """Store a boolean mask as an 8-bit grey PNG (0 or 255)."""
    target = ensure_parent_dir(path)
    pixels = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(pixels).save(target, "PNG")


def read_mask_png(path: PathLike) -> BoolArray:
    with Image.open(path) as image:
        return np.asarray(image.convert("L")) >= 128


def write_depth_pgm(depth: FloatArray, path: PathLike) -> None:
    """
    Store depth as a big-endian 16-bit PGM in whole millimetres.

    Raises:
        ValueError: If a depth value lies outside [0, 2] m
    """
    values = np.asarray(depth, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("Depth raster must be two-dimensional")
    if values.min() < 0.0 or values.max() > MAX_DEPTH:
        raise ValueError(f"Depth values must lie in [0, {MAX_DEPTH}] m")
    millimetres = np.rint(values * MM_PER_M).astype(">u2")
    rows, cols = values.shape
    header = b"%s\n%d %d\n%d\n" % (PGM_MAGIC, cols, rows, PGM_MAXVAL)
    target = ensure_parent_dir(path)
    target.write_bytes(header + millimetres.tobytes())
    logger.debug(f"Wrote {cols}x{rows} depth raster to {target}")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        if end == pos:
            raise ValueError("Truncated PGM header")
        tokens.append(data[pos:end])
        pos = end
    # exactly one whitespace byte separates the header from the pixels
    return tokens, pos + 1


def read_depth_pgm(path: PathLike) -> FloatArray:
    """
    Read a 16-bit PGM written by ``write_depth_pgm`` back into metres.

    Raises:
        ValueError: If the file is not a 16-bit binary PGM of the stated size
    """
    with open(path, "rb") as f:
        data = f.read()
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != PGM_MAGIC:
        raise ValueError(f"Not a binary PGM file: {path}")
    cols, rows, maxval = (int(token) for token in tokens[1:])
    if maxval != PGM_MAXVAL:
        raise ValueError(f"Expected a 16-bit PGM, got maxval {maxval}")
    payload = data[offset:]
    if len(payload) != rows * cols * 2:
        raise ValueError(
            f"PGM payload has {len(payload)} bytes, expected {rows * cols * 2}"
        )
    millimetres = np.frombuffer(payload, dtype=">u2").reshape(rows, cols)
    return millimetres.astype(np.float64) / MM_PER_M

"""Binary portable graymap (P5) reading and writing.

The native image carrier is the 8-bit binary PGM. Binary PPM (P6) color
input is accepted and converted to luminance with integer BT.601 weights:
Y = (77 R + 150 G + 29 B) >> 8.
"""

import re
from pathlib import Path

import numpy as np


class ImageIOError(Exception):
    """Base class for image decode/encode failures."""


class ImageFileMissingError(ImageIOError):
    pass


class ImageFormatError(ImageIOError):
    pass


_TOKEN = re.compile(rb"^[ \t\r\n]*(?:#[^\n]*\n[ \t\r\n]*)*([^ \t\r\n]+)")


def _read_tokens(data: bytes, count: int):
    """Pull whitespace/comment-delimited header tokens, returning them plus
    the offset just past the single whitespace byte ending the last one."""
    tokens = []
    pos = 0
    for _ in range(count):
        match = _TOKEN.match(data[pos:])
        if not match:
            raise ImageFormatError("truncated or malformed header")
        tokens.append(match.group(1))
        pos += match.end()
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\r", b"\n"):
        raise ImageFormatError("missing whitespace after header")
    return tokens, pos + 1


def load_image(path) -> np.ndarray:
    """Load an 8-bit grayscale image from a P5 (or P6, via luma) file."""
    path = Path(path)
    if not path.exists():
        raise ImageFileMissingError(f"no such image file: {path}")
    data = path.read_bytes()
    if data[:2] not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported image format in {path}")
    color = data[:2] == b"P6"
    tokens, offset = _read_tokens(data, 4)
    try:
        width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise ImageFormatError(f"non-numeric header field in {path}") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"bad dimensions {width}x{height} in {path}")
    if maxval != 255:
        raise ImageFormatError(
            f"unsupported bit depth (maxval {maxval}) in {path}; need 8-bit"
        )
    channels = 3 if color else 1
    expected = width * height * channels
    raster = data[offset : offset + expected]
    if len(raster) < expected:
        raise ImageFormatError(f"truncated raster in {path}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    if color:
        rgb = pixels.astype(np.uint32)
        luma = (77 * rgb[:, :, 0] + 150 * rgb[:, :, 1] + 29 * rgb[:, :, 2]) >> 8
        return luma.astype(np.uint8)
    return pixels[:, :, 0].copy()


def save_image(path, pixels: np.ndarray) -> None:
    """Write an 8-bit grayscale image as binary P5."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ImageFormatError("image must be 2-D")
    if pixels.dtype != np.uint8:
        if np.any(pixels < 0) or np.any(pixels > 255):
            raise ImageFormatError("pixel values out of 8-bit range")
        pixels = pixels.astype(np.uint8)
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())

"""Grayscale images and PGM (P2 plain / P5 binary) files.

Pixels live in ``[0, 1]``; a stored value ``v`` maps to ``v / maxval``.  Files
are written with maxval 255, reading accepts any maxval up to 65535 (two-byte
big-endian samples in P5 when maxval > 255).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UsageError

__all__ = ["Image", "read_pgm", "write_pgm", "parse_pgm", "format_pgm"]


@dataclass(eq=False)
class Image:
    pixels: np.ndarray  # float, shape (height, width)

    def __post_init__(self):
        p = np.array(self.pixels, dtype=float)
        if p.ndim != 2 or p.size == 0:
            raise UsageError("image must be a non-empty 2-D array")
        if not np.all(np.isfinite(p)):
            raise UsageError("image has non-finite pixels")
        self.pixels = p

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple:
        return self.pixels.shape

    def clamped(self) -> "Image":
        return Image(np.clip(self.pixels, 0.0, 1.0))

    def to_levels(self, maxval: int = 255) -> np.ndarray:
        """Integer sample values (round half even, clamped)."""
        return np.rint(np.clip(self.pixels, 0.0, 1.0) * maxval).astype(np.int64)

    @classmethod
    def from_levels(cls, levels, maxval: int = 255) -> "Image":
        return cls(np.asarray(levels, dtype=float) / maxval)

    def quantized(self, maxval: int = 255) -> "Image":
        """The image as it reads back after a round trip through a PGM file."""
        return Image.from_levels(self.to_levels(maxval), maxval)


def _tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ParseError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def parse_pgm(data: bytes) -> Image:
    (magic,), pos = _tokens(data, 1)
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"not a grayscale PGM (magic {magic!r})")
    (w, h, mx), pos = _tokens(data, 3, pos)
    try:
        width, height, maxval = int(w), int(h), int(mx)
    except ValueError as exc:
        raise ParseError("bad PGM header") from exc
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise ParseError(f"bad PGM dimensions/maxval {width}x{height}/{maxval}")
    count = width * height
    if magic == b"P2":
        vals, _ = _tokens(data, count, pos) if count else ([], pos)
        try:
            levels = np.array([int(v) for v in vals], dtype=np.int64)
        except ValueError as exc:
            raise ParseError("non-integer sample in plain PGM") from exc
    else:
        body = data[pos + 1 :]  # exactly one whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(body) < count * dtype.itemsize:
            raise ParseError("truncated PGM raster")
        levels = np.frombuffer(body, dtype=dtype, count=count).astype(np.int64)
    if np.any(levels > maxval):
        raise ParseError("sample exceeds maxval")
    return Image.from_levels(levels.reshape(height, width), maxval)


def format_pgm(img: Image, binary: bool = True) -> bytes:
    levels = img.to_levels(255)
    head = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    if binary:
        return head + levels.astype(np.uint8).tobytes()
    lines = [" ".join(str(int(v)) for v in row) for row in levels]
    return head + ("\n".join(lines) + "\n").encode()


def read_pgm(path) -> Image:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def write_pgm(path, img: Image, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(format_pgm(img, binary))

"""PNM ingestion and RGB to luminance conversion.

Supports the Netpbm grayscale (P2 ASCII, P5 binary) and color (P3 ASCII,
P6 binary) formats, 8 and 16 bit.  Grayscale files decode straight to a
:class:`GrayImage` with values in ``[0, 1]``; color files decode to an
:class:`RgbImage` holding the raw integer samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Rec.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_WHITESPACE = b" \t\n\v\f\r"
_MAGICS = {b"P2": (1, False), b"P3": (3, False), b"P5": (1, True), b"P6": (3, True)}


class PnmError(ValueError):
    """Base class for PNM decoding failures; ``offset`` is the byte position."""

    kind = "pnm error"

    def __init__(self, message, offset):
        super().__init__(f"{self.kind} at byte {offset}: {message}")
        self.offset = offset


class PnmMagicError(PnmError):
    kind = "unsupported magic"


class PnmHeaderError(PnmError):
    kind = "malformed header"


class PnmMaxvalError(PnmError):
    kind = "maxval out of range"


class PnmTruncatedError(PnmError):
    kind = "truncated payload"


class PnmSampleError(PnmError):
    kind = "sample exceeds maxval"


@dataclass(frozen=True)
class RgbImage:
    """Color raster; ``pixels`` has shape (height, width, 3) of ints in [0, maxval]."""

    pixels: np.ndarray
    maxval: int = 255

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must have shape (height, width, 3), got {px.shape}")
        if not 1 <= self.maxval <= 65535:
            raise ValueError(f"maxval must be in 1..65535, got {self.maxval}")
        if px.size and (px.min() < 0 or px.max() > self.maxval):
            raise ValueError("channel values must lie in [0, maxval]")
        object.__setattr__(self, "pixels", px.astype(np.int64, copy=False))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class GrayImage:
    """Luminance raster; ``values`` has shape (height, width) in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {v.shape}")
        if v.size and not (np.all(v >= 0.0) and np.all(v <= 1.0)):
            raise ValueError("luminance values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos:self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == b"#":
                while self.pos < len(data) and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def token(self):
        """Next whitespace-delimited token and its offset, or (None, offset) at EOF."""
        self.skip_space()
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos] not in _WHITESPACE and data[self.pos] != 0x23:
            self.pos += 1
        if self.pos == start:
            return None, start
        return data[start:self.pos], start


def _header_int(cur: _Cursor, what: str) -> int:
    tok, off = cur.token()
    if tok is None:
        raise PnmHeaderError(f"missing {what}", off)
    if not tok.isdigit():
        raise PnmHeaderError(f"{what} is not a decimal integer: {tok[:16]!r}", off)
    return int(tok)


def load_pnm(data: bytes) -> RgbImage | GrayImage:
    """Decode a P2/P3/P5/P6 image.

    Grayscale formats return a :class:`GrayImage` of ``sample / maxval``;
    color formats return the raw samples as an :class:`RgbImage`.

    Raises a :class:`PnmError` subclass carrying the byte offset of the fault.
    """
    data = bytes(data)
    magic = data[:2]
    if magic not in _MAGICS:
        raise PnmMagicError(f"expected P2, P3, P5 or P6, got {magic!r}", 0)
    channels, binary = _MAGICS[magic]

    cur = _Cursor(data)
    cur.pos = 2
    if cur.pos < len(data) and data[cur.pos] not in _WHITESPACE and data[cur.pos] != 0x23:
        raise PnmHeaderError("magic must be followed by whitespace", cur.pos)
    width = _header_int(cur, "width")
    height = _header_int(cur, "height")
    if width < 1 or height < 1:
        raise PnmHeaderError(f"dimensions must be positive, got {width}x{height}", cur.pos)
    cur.skip_space()
    maxval_off = cur.pos
    maxval = _header_int(cur, "maxval")
    maxval_tok_end = cur.pos
    if not 1 <= maxval <= 65535:
        raise PnmMaxvalError(f"maxval {maxval} not in 1..65535", maxval_off)

    count = width * height * channels
    if binary:
        if maxval_tok_end >= len(data) or data[maxval_tok_end] not in _WHITESPACE:
            raise PnmHeaderError("maxval must be followed by a single whitespace byte",
                                 maxval_tok_end)
        start = maxval_tok_end + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        have = len(data) - start
        if have < need:
            raise PnmTruncatedError(f"raster needs {need} bytes, found {have}", len(data))
        samples = np.frombuffer(data, dtype=dtype, count=count, offset=start).astype(np.int64)
        bad = np.flatnonzero(samples > maxval)
        if bad.size:
            raise PnmSampleError(f"sample {samples[bad[0]]} > maxval {maxval}",
                                 start + int(bad[0]) * dtype.itemsize)
    else:
        samples = _ascii_fast(data[cur.pos:], count, maxval)
        if samples is None:
            # slow path pinpoints the offending token
            samples = _ascii_slow(cur, count, maxval)

    if channels == 1:
        return GrayImage(samples.reshape(height, width) / maxval)
    return RgbImage(samples.reshape(height, width, 3), maxval)


def _ascii_fast(rest: bytes, count: int, maxval: int):
    if b"#" in rest:
        return None
    tokens = rest.split(maxsplit=count)[:count]
    if len(tokens) < count or not all(t.isdigit() for t in tokens):
        return None
    samples = np.fromiter(map(int, tokens), dtype=np.int64, count=count)
    if samples.size and samples.max() > maxval:
        return None
    return samples


def _ascii_slow(cur: _Cursor, count: int, maxval: int) -> np.ndarray:
    samples = np.empty(count, dtype=np.int64)
    for n in range(count):
        tok, off = cur.token()
        if tok is None:
            raise PnmTruncatedError(f"expected {count} samples, found {n}", off)
        if not tok.isdigit():
            raise PnmHeaderError(f"sample is not a decimal integer: {tok[:16]!r}", off)
        v = int(tok)
        if v > maxval:
            raise PnmSampleError(f"sample {v} > maxval {maxval}", off)
        samples[n] = v
    return samples


def rgb_to_luminance(img: RgbImage) -> GrayImage:
    """Weighted Rec.601 sum of the channels, scaled to [0, 1].

    Evaluated as ``R + wg*(G-R) + wb*(B-R)`` (the weights sum to one), so a
    gray pixel R=G=B=v maps to exactly ``v / maxval``.
    """
    px = img.pixels
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    _, wg, wb = LUMA_WEIGHTS
    y = (r + wg * (g - r) + wb * (b - r)) / img.maxval
    return GrayImage(np.clip(y, 0.0, 1.0))


def to_gray(img: RgbImage | GrayImage) -> GrayImage:
    if isinstance(img, GrayImage):
        return img
    return rgb_to_luminance(img)


def stats(img: GrayImage) -> tuple[float, float, float]:
    """Return ``(min, max, mean)`` of the image values."""
    v = img.values
    if v.size == 0:
        raise ValueError("stats of an empty image")
    return float(v.min()), float(v.max()), float(v.mean())


def encode_pnm(img: RgbImage | GrayImage, binary: bool = True, maxval: int = 255) -> bytes:
    """Encode as P5/P6 (``binary``) or P2/P3.

    A :class:`GrayImage` is quantized to ``round(v * maxval)``; an
    :class:`RgbImage` keeps its own maxval and ``maxval`` is ignored.
    """
    if isinstance(img, GrayImage):
        if not 1 <= maxval <= 65535:
            raise ValueError(f"maxval {maxval} not in 1..65535")
        samples = np.rint(img.values * maxval).astype(np.int64)
        magic = "P5" if binary else "P2"
    else:
        maxval = img.maxval
        samples = img.pixels
        magic = "P6" if binary else "P3"
    header = f"{magic}\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    flat = samples.reshape(-1)
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        return header + flat.astype(dtype).tobytes()
    per_row = img.width * (1 if isinstance(img, GrayImage) else 3)
    rows = flat.reshape(img.height, per_row)
    body = "\n".join(" ".join(str(int(s)) for s in row) for row in rows)
    return header + body.encode("ascii") + b"\n"

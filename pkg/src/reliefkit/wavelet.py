"""Haar and Daubechies-4 low/high-pass filters and the smoothing pyramid.

All filters use periodic extension at the signal boundaries.  The D4
high-pass taps are indexed from -2, so output ``k`` of the high-pass reads
samples ``2k-2 .. 2k+1``; the low-pass reads ``2k .. 2k+3``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Iterator

import numpy as np

from .heightmap import pad_to_even


@dataclass(frozen=True)
class FilterBank:
    """A low-pass/high-pass pair; ``*_offset`` is the index of the first tap."""

    name: str
    lowpass: tuple[float, ...]
    low_offset: int
    highpass: tuple[float, ...]
    high_offset: int

    def taps(self, which: str) -> tuple[np.ndarray, int]:
        if which == "low":
            return np.asarray(self.lowpass), self.low_offset
        if which == "high":
            return np.asarray(self.highpass), self.high_offset
        raise ValueError(f"which must be 'low' or 'high', got {which!r}")

    @property
    def length(self) -> int:
        return max(len(self.lowpass), len(self.highpass))


def _d4_bank() -> FilterBank:
    s3 = sqrt(3.0)
    d = 4.0 * sqrt(2.0)
    h = ((1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d)
    # g_{-2}, g_{-1}, g_0, g_1
    g = (h[3], -h[2], h[1], -h[0])
    return FilterBank("d4", h, 0, g, -2)


D4 = _d4_bank()
HAAR = FilterBank("haar", (1 / sqrt(2.0),) * 2, 0, (1 / sqrt(2.0), -1 / sqrt(2.0)), 0)


def _check_length(n: int, taps: int, what: str = "signal length"):
    if n < max(taps, 4) or n % 2:
        raise ValueError(f"{what} must be even and >= {max(taps, 4)}, got {n}")


def analysis_filter(x, coeffs, offset: int, axis: int = -1) -> np.ndarray:
    """Filter and downsample by two along ``axis`` with periodic wrap.

    ``out[k] = sum_i coeffs[i] * x[(2k + offset + i) mod n]``.
    """
    x = np.asarray(x, dtype=np.float64)
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    k = np.arange(n // 2)
    out = np.zeros(x.shape[:-1] + (n // 2,))
    for i, c in enumerate(coeffs):
        out += c * x[..., (2 * k + offset + i) % n]
    return np.moveaxis(out, -1, axis)


def d4_lowpass(s) -> np.ndarray:
    """``(Hs)_k = h0 s_2k + h1 s_2k+1 + h2 s_2k+2 + h3 s_2k+3``, periodic."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError("d4_lowpass expects a 1-D signal")
    _check_length(len(s), 4)
    return analysis_filter(s, D4.lowpass, D4.low_offset)


def d4_highpass(s) -> np.ndarray:
    """``(Gs)_k = g-2 s_2k-2 + g-1 s_2k-1 + g0 s_2k + g1 s_2k+1``, periodic."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError("d4_highpass expects a 1-D signal")
    _check_length(len(s), 4)
    return analysis_filter(s, D4.highpass, D4.high_offset)


def haar_block_average(m) -> np.ndarray:
    """Replace each 2x2 block by the mean of its four values.

    Both dimensions must be even; pad with :func:`reliefkit.heightmap.pad_to_even` first.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    rows, cols = m.shape
    if rows % 2 or cols % 2 or rows == 0 or cols == 0:
        raise ValueError(f"dimensions must be even and nonzero, got {rows}x{cols}; pad first")
    return (m[0::2, 0::2] + m[0::2, 1::2] + m[1::2, 0::2] + m[1::2, 1::2]) / 4.0


def separable_filter_2d(m, fb: FilterBank = D4, which: str = "low") -> np.ndarray:
    """Apply the 1-D filter along every row, then every column of the result."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    coeffs, offset = fb.taps(which)
    _check_length(m.shape[0], len(coeffs), "row count")
    _check_length(m.shape[1], len(coeffs), "column count")
    rows_done = analysis_filter(m, coeffs, offset, axis=1)
    return analysis_filter(rows_done, coeffs, offset, axis=0)


_MIN_SIZE = {"haar": 2, "d4": 4}


def _smooth_once(m: np.ndarray, kernel: str) -> np.ndarray:
    if kernel == "haar":
        return haar_block_average(m)
    return separable_filter_2d(m, D4, "low")


def pyramid_levels(m, rounds: int, kernel: str = "haar") -> Iterator[np.ndarray]:
    """Yield the padded input followed by each of the ``rounds`` smoothed levels.

    The input is edge-padded so both dimensions divide by ``2**rounds``.
    Each dimension of the unpadded input must be at least ``2**rounds`` for
    Haar and ``2**(rounds+1)`` for D4, so no level drops below the filter
    support.
    """
    if kernel not in _MIN_SIZE:
        raise ValueError(f"kernel must be 'haar' or 'd4', got {kernel!r}")
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if rounds:
        need = _MIN_SIZE[kernel] * 2 ** (rounds - 1)
        if min(m.shape) < need:
            raise ValueError(
                f"{rounds} {kernel} rounds need both dimensions >= {need}, got "
                f"{m.shape[0]}x{m.shape[1]}")
    level = pad_to_even(m, rounds)
    yield level
    for _ in range(rounds):
        level = _smooth_once(level, kernel)
        yield level


def pyramid_smooth(m, rounds: int, kernel: str = "haar") -> np.ndarray:
    """Smooth ``rounds`` times; output shape is the padded shape over ``2**rounds``.

    D4 rounds carry the filter's gain of 2 per round (constant c becomes
    ``2**rounds * c``); Haar rounds preserve the mean.
    """
    for level in pyramid_levels(m, rounds, kernel):
        pass
    return level


def detect_spikes(s, threshold: float) -> np.ndarray:
    """Indices ``k`` (ascending) where ``|d4_highpass(s)[k]| > threshold``.

    Index ``k`` is in the half-length output domain; its stencil covers
    samples ``2k-2 .. 2k+1``.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    return np.flatnonzero(np.abs(d4_highpass(s)) > threshold)

"""Height fields: turning a smoothed luminance matrix into millimeters."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class HeightField:
    """Heights in mm over a regular grid.

    Row ``i``, column ``j`` sits at ``(x, y) = (j * dx, i * dy)``.  ``base``
    is a solid plate added under every point when meshing.
    """

    heights: np.ndarray
    dx: float = 1.0
    dy: float = 1.0
    base: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=np.float64)
        if h.ndim != 2:
            raise ValueError(f"heights must be 2-D, got shape {h.shape}")
        if h.size and not (np.all(np.isfinite(h)) and h.min() >= 0.0):
            raise ValueError("heights must be finite and >= 0")
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError(f"grid spacing must be positive, got dx={self.dx}, dy={self.dy}")
        if not self.base >= 0:
            raise ValueError(f"base must be >= 0, got {self.base}")
        object.__setattr__(self, "heights", h)

    @property
    def rows(self) -> int:
        return self.heights.shape[0]

    @property
    def cols(self) -> int:
        return self.heights.shape[1]


def gray_to_height(m, zmin: float = 2.0, zmax: float = 10.0, invert: bool = False,
                   base: float = 0.0) -> HeightField:
    """Map luminance ``v`` in [0, 1] affinely onto ``[zmin, zmax]``.

    Brighter is taller; with ``invert`` the map uses ``1 - v``.
    """
    v = np.asarray(m, dtype=np.float64)
    if not (zmax > zmin >= 0):
        raise ValueError(f"need zmax > zmin >= 0, got zmin={zmin}, zmax={zmax}")
    if v.size and not (v.min() >= 0.0 and v.max() <= 1.0):
        raise ValueError("matrix values must lie in [0, 1]")
    if invert:
        v = 1.0 - v
    return HeightField(zmin + v * (zmax - zmin), base=base)


def threshold_filter(m, cut: float = 0.5, low_h: float = 5.0, high_h: float = 10.0) -> np.ndarray:
    """Two-level posterization: ``v >= cut`` becomes ``high_h``, else ``low_h``."""
    if not 0 < cut < 1:
        raise ValueError(f"cut must be in (0, 1), got {cut}")
    if low_h < 0 or high_h < 0:
        raise ValueError("threshold heights must be >= 0")
    v = np.asarray(m, dtype=np.float64)
    return np.where(v >= cut, float(high_h), float(low_h))


def rescale_axes(hf: HeightField, sx: float = 1.0, sy: float = 1.0) -> HeightField:
    """Stretch the grid spacing; heights are untouched."""
    if not (sx > 0 and sy > 0):
        raise ValueError(f"scale factors must be positive, got sx={sx}, sy={sy}")
    return replace(hf, dx=hf.dx * sx, dy=hf.dy * sy)


def pad_to_even(m, rounds: int) -> np.ndarray:
    """Replicate the last row/column until both dimensions divide by ``2**rounds``."""
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    m = np.asarray(m, dtype=np.float64)
    step = 2 ** rounds
    pad = [(0, -n % step) for n in m.shape]
    if not any(p for _, p in pad):
        return m
    return np.pad(m, pad, mode="edge")

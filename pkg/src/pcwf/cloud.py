"""Voxelized point-cloud frames: validation, color conversion, Morton ordering.

A frame is a set of distinct voxel positions, each carrying a 3-channel
8-bit color attribute.  Channels are stored in (c1, c2, c3) order; the
toolchain works in Luma/Cb/Cr, with BT.709 full-range conversion available
for RGB content at ingestion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import morton


class ValidationError(ValueError):
    """Input violates a point-cloud invariant."""


class GeometryMismatchError(ValueError):
    """Two frames that must share geometry do not."""


class VoxelPosition(NamedTuple):
    x: int
    y: int
    z: int


class ColorTriple(NamedTuple):
    c1: int
    c2: int
    c3: int


def round_half_away(values):
    """Round to nearest integer with halves going away from zero.

    The single rounding rule used throughout the toolchain so encoder and
    decoder agree bit-exactly.
    """
    v = np.asarray(values, dtype=np.float64)
    out = np.sign(v) * np.floor(np.abs(v) + 0.5)
    if np.isscalar(values) or np.ndim(values) == 0:
        return float(out)
    return out


# BT.709 primaries, full range.
_KR = 0.2126
_KB = 0.0722
_KG = 1.0 - _KR - _KB


def _check_channels(name, *channels):
    for c in channels:
        arr = np.asarray(c)
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValidationError(f"{name} channel out of [0, 255]")


def rgb_to_ycbcr(r, g, b):
    """BT.709 full-range RGB -> (Luma, Cb, Cr), rounded and clamped to 8 bit."""
    _check_channels("rgb", r, g, b)
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    y = _KR * r + _KG * g + _KB * b
    cb = (b - y) / (2.0 * (1.0 - _KB)) + 128.0
    cr = (r - y) / (2.0 * (1.0 - _KR)) + 128.0
    out = np.clip(round_half_away(np.stack([y, cb, cr], axis=-1)), 0, 255)
    if out.ndim == 1:
        return ColorTriple(int(out[0]), int(out[1]), int(out[2]))
    return out.astype(np.uint8)


def ycbcr_to_rgb(c1, c2, c3):
    """Inverse BT.709 full-range transform, rounded and clamped to 8 bit."""
    _check_channels("ycbcr", c1, c2, c3)
    y = np.asarray(c1, dtype=np.float64)
    cb = np.asarray(c2, dtype=np.float64) - 128.0
    cr = np.asarray(c3, dtype=np.float64) - 128.0
    r = y + 2.0 * (1.0 - _KR) * cr
    b = y + 2.0 * (1.0 - _KB) * cb
    g = (y - _KR * r - _KB * b) / _KG
    out = np.clip(round_half_away(np.stack([r, g, b], axis=-1)), 0, 255)
    if out.ndim == 1:
        return int(out[0]), int(out[1]), int(out[2])
    return out.astype(np.uint8)


@dataclass(frozen=True)
class PointCloud:
    """One frame: parallel position and color arrays, immutable once built.

    positions: (n, 3) int64, each coordinate in [0, 2**21), pairwise distinct.
    colors:    (n, 3) uint8 channels (c1, c2, c3).
    morton_sorted: True when positions ascend strictly by Morton code.
    """

    positions: np.ndarray
    colors: np.ndarray
    morton_sorted: bool = False
    codes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.int64, copy=True)
        col = np.asarray(self.colors)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValidationError(f"positions must be (n, 3), got {pos.shape}")
        if col.shape != pos.shape:
            raise ValidationError(
                f"colors shape {col.shape} does not match positions {pos.shape}"
            )
        if pos.shape[0] < 1:
            raise ValidationError("a point cloud needs at least one point")
        if col.dtype != np.uint8:
            c = np.asarray(col, dtype=np.int64)
            if c.min() < 0 or c.max() > 255:
                raise ValidationError("color channels out of [0, 255]")
            col = c.astype(np.uint8)
        col = np.array(col, copy=True)
        try:
            codes = morton.encode_array(pos)
        except morton.CoordinateOverflowError as exc:
            raise ValidationError(str(exc)) from exc
        if np.unique(codes).size != pos.shape[0]:
            raise ValidationError("duplicate voxel positions")
        if self.morton_sorted and pos.shape[0] > 1:
            if not np.all(codes[1:] > codes[:-1]):
                raise ValidationError("cloud claims Morton order but is not sorted")
        for arr in (pos, col, codes):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "colors", col)
        object.__setattr__(self, "codes", codes)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def point(self, i: int) -> tuple[VoxelPosition, ColorTriple]:
        p = self.positions[i]
        c = self.colors[i]
        return VoxelPosition(*map(int, p)), ColorTriple(*map(int, c))

    def with_colors(self, colors: np.ndarray) -> "PointCloud":
        """Same geometry, new attributes."""
        return PointCloud(self.positions, colors, morton_sorted=self.morton_sorted)


def sort_by_morton(cloud: PointCloud) -> PointCloud:
    """Stable reorder of a cloud into ascending Morton-code order."""
    if cloud.morton_sorted:
        return cloud
    order = np.argsort(cloud.codes, kind="stable")
    return PointCloud(
        cloud.positions[order], cloud.colors[order], morton_sorted=True
    )


def check_same_geometry(a: PointCloud, b: PointCloud) -> None:
    """Raise unless two Morton-sorted clouds occupy identical positions."""
    if a.n != b.n or not np.array_equal(a.positions, b.positions):
        raise GeometryMismatchError(
            f"frames do not share geometry ({a.n} vs {b.n} points)"
        )


@dataclass
class FrameSequence:
    """An ordered list of frames plus the group-of-frames size."""

    frames: list
    gof_size: int = 8

    def __post_init__(self):
        if self.gof_size < 1:
            raise ValidationError("gof_size must be >= 1")
        if not self.frames:
            raise ValidationError("a sequence needs at least one frame")

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

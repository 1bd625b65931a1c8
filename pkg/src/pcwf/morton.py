"""Morton (Z-order) codes for voxel grids and neighbor offset arithmetic.

A voxel position (x, y, z) with each coordinate below 2**21 maps to a 63-bit
code by bit interleaving: bit 3i holds z_i, bit 3i+1 holds y_i, bit 3i+2
holds x_i.  Coplanar neighbor positions are reached directly in the code
domain by masked addition of precomputed offsets, so occupancy probes never
need to de-interleave.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COORD_BITS = 21
COORD_LIMIT = 1 << COORD_BITS

_U64 = np.uint64
_WORD = 0xFFFFFFFFFFFFFFFF

# One dimension of an interleaved code: bits 0, 3, 6, ... 63.
DIMENSION_MASK = 0x9249249249249249
MASK_Z = DIMENSION_MASK
MASK_Y = (DIMENSION_MASK << 1) & _WORD
MASK_X = (DIMENSION_MASK << 2) & _WORD

# The z dimension owns 22 in-word bit slots but only 21 are addressable by
# valid coordinates; bit 63 acts as its overflow indicator.
_Z_OVERFLOW_BIT = 1 << 63


@dataclass(frozen=True)
class SearchOffset:
    """One row of the coplanar-neighbor search table."""

    index: int
    delta: tuple[int, int, int]
    offset: int


# Offsets of the six coplanar neighbors, in the column order that the
# neighbor matrices and the payload flags rely on.  Negative unit steps are
# the all-ones pattern of the corresponding dimension mask (two's complement
# of 1 within the dilated dimension).
SEARCH_TABLE = (
    SearchOffset(1, (1, 0, 0), 0x0000000000000004),
    SearchOffset(2, (0, 1, 0), 0x0000000000000002),
    SearchOffset(3, (0, 0, 1), 0x0000000000000001),
    SearchOffset(4, (-1, 0, 0), 0x4924924924924924),
    SearchOffset(5, (0, -1, 0), 0x2492492492492492),
    SearchOffset(6, (0, 0, -1), 0x9249249249249249),
)


class CoordinateOverflowError(ValueError):
    """A coordinate is negative or does not fit in 21 bits."""


def _spread(v: np.ndarray) -> np.ndarray:
    """Dilate 21-bit values so that consecutive bits land 3 apart."""
    v = v.astype(np.uint64)
    v = (v | (v << _U64(32))) & _U64(0x1F00000000FFFF)
    v = (v | (v << _U64(16))) & _U64(0x1F0000FF0000FF)
    v = (v | (v << _U64(8))) & _U64(0x100F00F00F00F00F)
    v = (v | (v << _U64(4))) & _U64(0x10C30C30C30C30C3)
    v = (v | (v << _U64(2))) & _U64(0x1249249249249249)
    return v


def _compact(v: np.ndarray) -> np.ndarray:
    """Inverse of _spread: collect every third bit into a 21-bit value."""
    v = v & _U64(0x1249249249249249)
    v = (v ^ (v >> _U64(2))) & _U64(0x10C30C30C30C30C3)
    v = (v ^ (v >> _U64(4))) & _U64(0x100F00F00F00F00F)
    v = (v ^ (v >> _U64(8))) & _U64(0x1F0000FF0000FF)
    v = (v ^ (v >> _U64(16))) & _U64(0x1F00000000FFFF)
    v = (v ^ (v >> _U64(32))) & _U64(0x1FFFFF)
    return v


def encode_array(positions: np.ndarray) -> np.ndarray:
    """Interleave an (n, 3) array of voxel coordinates into uint64 codes."""
    pos = np.asarray(positions)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) coordinate array, got shape {pos.shape}")
    if pos.size and (pos.min() < 0 or pos.max() >= COORD_LIMIT):
        raise CoordinateOverflowError(
            f"coordinates must lie in [0, {COORD_LIMIT}), got range "
            f"[{pos.min()}, {pos.max()}]"
        )
    x, y, z = (pos[:, i].astype(np.uint64) for i in range(3))
    return (_spread(x) << _U64(2)) | (_spread(y) << _U64(1)) | _spread(z)


def decode_array(codes: np.ndarray) -> np.ndarray:
    """Recover (n, 3) voxel coordinates from uint64 codes."""
    c = np.asarray(codes, dtype=np.uint64)
    out = np.empty((c.shape[0], 3), dtype=np.int64)
    out[:, 0] = _compact(c >> _U64(2)).astype(np.int64)
    out[:, 1] = _compact(c >> _U64(1)).astype(np.int64)
    out[:, 2] = _compact(c).astype(np.int64)
    return out


def encode(x: int, y: int, z: int) -> int:
    """Interleave a single position."""
    return int(encode_array(np.array([[x, y, z]], dtype=np.int64))[0])


def decode(code: int) -> tuple[int, int, int]:
    """De-interleave a single code."""
    r = decode_array(np.array([code], dtype=np.uint64))[0]
    return int(r[0]), int(r[1]), int(r[2])


def offset_add_array(
    codes: np.ndarray, offset: int
) -> tuple[np.ndarray, np.ndarray]:
    """Add a search-table offset to an array of codes in the code domain.

    Per dimension mask m, the sum is computed as ((a | ~m) + (b & m)) & m so
    that a carry between two dilated bits of the same dimension ripples
    through the filler bits instead of escaping into another dimension.

    Returns (result_codes, valid) where valid[i] is False when the target
    coordinate would fall outside [0, 2**21): a wrapped or overflowing
    dimension add.  Invalid entries hold an unspecified code and must be
    treated as empty positions by callers.
    """
    a = np.asarray(codes, dtype=np.uint64)
    result = np.zeros_like(a)
    valid = np.ones(a.shape, dtype=bool)
    for mask in (MASK_X, MASK_Y, MASK_Z):
        m = _U64(mask)
        d = offset & mask
        extracted = a & m
        if d == 0:
            result |= extracted
            continue
        summed = ((a | ~m) + _U64(d)) & m
        result |= summed
        if d == mask:
            # Dilated -1: result must have decreased, else the coordinate
            # was 0 and wrapped upward.
            valid &= summed < extracted
        else:
            # Dilated +1: result must have increased and, for z, must not
            # have spilled into the 22nd slot at bit 63.
            valid &= summed > extracted
            if mask == MASK_Z:
                valid &= (summed & _U64(_Z_OVERFLOW_BIT)) == 0
    return result, valid


def offset_add(code: int, offset: int) -> tuple[int, bool]:
    """Scalar form of offset_add_array."""
    res, valid = offset_add_array(np.array([code], dtype=np.uint64), offset)
    return int(res[0]), bool(valid[0])


def offset_add_nocarry(code: int, offset: int) -> int:
    """Masked per-dimension add without carry saturation.

    Kept for comparison only: when the dilated add of one dimension
    generates a carry, that carry lands in another dimension's bit slot and
    the result no longer decodes to the intended neighbor.  Production code
    must use offset_add.
    """
    out = 0
    for mask in (MASK_Z, MASK_Y, MASK_X):
        out |= ((code & mask) + (offset & mask)) & _WORD
    return out & _WORD

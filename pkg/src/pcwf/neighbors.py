"""Coplanar nearest-neighbor gathering via a Morton-code occupancy index.

For every point the gather produces a 7-column attribute row per color
component: column 0 is the point's own reconstructed attribute, columns 1-6
follow the search-table neighbor order.  Probes that hit an empty or
out-of-bounds position fall back to the point's own attribute (the virtual
attribute), so a row is always fully populated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import morton
from .cloud import PointCloud, ValidationError

# A single flat occupancy array is only allocated when the padded bounding
# cube holds at most this many voxels; larger clouds fall back to a hashed
# table with O(1) average probes.
DENSE_VOLUME_LIMIT = 1 << 24
SLICE_BITS = 18


class IndexTable:
    """Maps the Morton code of an occupied voxel to its point serial.

    Probes for unoccupied (or out-of-range) codes report a miss.  The dense
    backing covers the padded bounding cube and is conceptually partitioned
    into Morton-range slices of 2**SLICE_BITS codes (n_slices below); the
    hashed backing has no geometric extent.
    """

    def __init__(self, cloud: PointCloud):
        if not cloud.morton_sorted:
            raise ValidationError("index table requires a Morton-sorted cloud")
        codes = cloud.codes
        if np.unique(codes).size != codes.size:
            raise ValidationError("duplicate Morton codes")
        max_coord = int(cloud.positions.max())
        cube_bits = max(int(max_coord).bit_length(), 1)
        volume = 1 << (3 * cube_bits)
        self.n_points = cloud.n
        if volume <= DENSE_VOLUME_LIMIT:
            self._dense = np.full(volume, -1, dtype=np.int64)
            self._dense[codes.astype(np.int64)] = np.arange(cloud.n)
            self._hash = None
            self.n_slices = max(1, volume >> SLICE_BITS)
        else:
            self._dense = None
            self._hash = {int(c): i for i, c in enumerate(codes)}
            self.n_slices = 0

    @property
    def dense(self) -> bool:
        return self._dense is not None

    def lookup(self, code: int):
        """Serial of the point at this code, or None when unoccupied."""
        if self._dense is not None:
            if 0 <= code < self._dense.size:
                serial = int(self._dense[code])
                return serial if serial >= 0 else None
            return None
        serial = self._hash.get(int(code))
        return serial

    def lookup_array(self, codes: np.ndarray, valid: np.ndarray) -> np.ndarray:
        """Vectorized probe: -1 marks a miss or an invalid query."""
        out = np.full(codes.shape, -1, dtype=np.int64)
        if self._dense is not None:
            q = codes.astype(np.int64)
            in_range = valid & (q >= 0) & (q < self._dense.size)
            out[in_range] = self._dense[q[in_range]]
            return out
        idx = np.nonzero(valid)[0]
        get = self._hash.get
        for i in idx:
            serial = get(int(codes[i]))
            if serial is not None:
                out[i] = serial
        return out


@dataclass(frozen=True)
class NeighborMatrix:
    """Per-component (n, 7) attribute rows plus neighbor occupancy flags."""

    values: np.ndarray    # (3, n, 7) float64
    occupied: np.ndarray  # (n, 6) bool

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def component(self, i: int) -> np.ndarray:
        return self.values[i]


def build_index(cloud: PointCloud) -> IndexTable:
    """One pass over a Morton-sorted cloud; every occupied position indexed."""
    return IndexTable(cloud)


def gather_neighbors(cloud: PointCloud, table: IndexTable) -> NeighborMatrix:
    """Gather each point's 7-column rows using code-domain offset probes."""
    if table.n_points != cloud.n:
        raise ValidationError("index table was built from a different cloud")
    n = cloud.n
    attrs = cloud.colors.astype(np.float64)
    values = np.empty((3, n, 7), dtype=np.float64)
    values[:, :, 0] = attrs.T
    occupied = np.zeros((n, 6), dtype=bool)
    self_serial = np.arange(n)
    for j, entry in enumerate(morton.SEARCH_TABLE):
        target, valid = morton.offset_add_array(cloud.codes, entry.offset)
        serial = table.lookup_array(target, valid)
        hit = serial >= 0
        occupied[:, j] = hit
        source = np.where(hit, serial, self_serial)
        values[:, :, j + 1] = attrs[source, :].T
    return NeighborMatrix(values=values, occupied=occupied)


def brute_force_neighbors(cloud: PointCloud) -> NeighborMatrix:
    """Reference gather by exact Cartesian probing; bit-identical contract.

    Scans coordinate space directly (no Morton arithmetic), so it serves as
    the independent check for gather_neighbors.
    """
    n = cloud.n
    attrs = cloud.colors.astype(np.float64)
    position_of = {
        (int(x), int(y), int(z)): i
        for i, (x, y, z) in enumerate(cloud.positions)
    }
    values = np.empty((3, n, 7), dtype=np.float64)
    values[:, :, 0] = attrs.T
    occupied = np.zeros((n, 6), dtype=bool)
    limit = morton.COORD_LIMIT
    for i, (x, y, z) in enumerate(cloud.positions):
        for j, entry in enumerate(morton.SEARCH_TABLE):
            tx = int(x) + entry.delta[0]
            ty = int(y) + entry.delta[1]
            tz = int(z) + entry.delta[2]
            serial = None
            if 0 <= tx < limit and 0 <= ty < limit and 0 <= tz < limit:
                serial = position_of.get((tx, ty, tz))
            if serial is None:
                values[:, i, j + 1] = attrs[i]
            else:
                occupied[i, j] = True
                values[:, i, j + 1] = attrs[serial]
    return NeighborMatrix(values=values, occupied=occupied)

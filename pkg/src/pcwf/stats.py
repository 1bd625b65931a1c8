"""Stationarity analysis: octree block segmentation and Morton-run statistics.

Splits a cloud into depth-d octree blocks (per-block channel mean/variance),
then splits each block's Morton-ordered points into up to m contiguous runs
and reports per-run mean, population variance, and the lag-1 autocovariance
between consecutive runs.  The lag-1 value pairs run s with run s+1 by rank,
truncates to the shorter run, and centers on the full-run means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, sort_by_morton
from .metrics import format_value


@dataclass(frozen=True)
class OctreeBlock:
    index: tuple          # (bx, by, bz) cube index at the requested depth
    serials: np.ndarray   # member point serials into the sorted cloud
    means: np.ndarray     # (3,)
    variances: np.ndarray  # (3,) population form


@dataclass(frozen=True)
class SubblockStats:
    counts: np.ndarray       # (m,)
    means: np.ndarray        # (m, 3)
    variances: np.ndarray    # (m, 3)
    autocovariances: np.ndarray  # (m-1, 3) lag-1 between runs s and s+1


def _cube_bits(cloud: PointCloud) -> int:
    return max(int(cloud.positions.max()).bit_length(), 1)


def octree_segment(cloud: PointCloud, depth: int) -> list:
    """Partition the cloud into non-empty depth-d cubes of its bounding cube.

    Block serials index the Morton-sorted view of the cloud, and members are
    listed in Morton order.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cloud = sort_by_morton(cloud)
    shift = max(_cube_bits(cloud) - depth, 0)
    keys = cloud.positions >> shift
    packed = (
        (keys[:, 0].astype(np.int64) << 42)
        | (keys[:, 1].astype(np.int64) << 21)
        | keys[:, 2].astype(np.int64)
    )
    order = np.argsort(packed, kind="stable")
    sorted_keys = packed[order]
    boundaries = np.nonzero(np.diff(sorted_keys))[0] + 1
    groups = np.split(order, boundaries)
    attrs = cloud.colors.astype(np.float64)
    blocks = []
    for serials in groups:
        member = attrs[serials]
        first = keys[serials[0]]
        blocks.append(
            OctreeBlock(
                index=(int(first[0]), int(first[1]), int(first[2])),
                serials=serials,
                means=member.mean(axis=0),
                variances=member.var(axis=0),
            )
        )
    return blocks


def _run_counts(n: int, m: int) -> np.ndarray:
    m = min(m, n)
    base, extra = divmod(n, m)
    counts = np.full(m, base, dtype=np.int64)
    counts[:extra] += 1
    return counts


def subblock_stats(block_attrs: np.ndarray, m: int = 100) -> SubblockStats:
    """Statistics over up to m contiguous Morton runs of one block.

    block_attrs must already be in Morton order, shape (n, 3).
    """
    attrs = np.asarray(block_attrs, dtype=np.float64)
    if attrs.ndim != 2 or attrs.shape[0] < 1:
        raise ValueError("block must be a non-empty (n, 3) array")
    if m < 1:
        raise ValueError("subblock count must be >= 1")
    counts = _run_counts(attrs.shape[0], m)
    edges = np.concatenate([[0], np.cumsum(counts)])
    runs = [attrs[edges[i]:edges[i + 1]] for i in range(len(counts))]
    means = np.array([r.mean(axis=0) for r in runs])
    variances = np.array([r.var(axis=0) for r in runs])
    autocov = np.zeros((len(runs) - 1, attrs.shape[1]))
    for s in range(len(runs) - 1):
        a, b = runs[s], runs[s + 1]
        length = min(len(a), len(b))
        centered_a = a[:length] - means[s]
        centered_b = b[:length] - means[s + 1]
        autocov[s] = (centered_a * centered_b).mean(axis=0)
    return SubblockStats(
        counts=counts, means=means, variances=variances,
        autocovariances=autocov,
    )


WSS_HEADER = (
    "row_type", "block_id", "bx", "by", "bz", "subblock_id", "count",
    "mean_c1", "mean_c2", "mean_c3",
    "var_c1", "var_c2", "var_c3",
    "gamma1_c1", "gamma1_c2", "gamma1_c3",
)


def wss_report(cloud: PointCloud, depth: int, m: int = 100) -> list:
    """Rows of the stationarity report: one per block, then one per run."""
    cloud = sort_by_morton(cloud)
    attrs = cloud.colors.astype(np.float64)
    rows = []
    for block_id, block in enumerate(octree_segment(cloud, depth)):
        bx, by, bz = block.index
        rows.append(
            ["block", block_id, bx, by, bz, "", int(block.serials.size)]
            + [float(v) for v in block.means]
            + [float(v) for v in block.variances]
            + ["", "", ""]
        )
        stats = subblock_stats(attrs[block.serials], m)
        for s in range(stats.counts.size):
            gamma = (
                [float(v) for v in stats.autocovariances[s]]
                if s + 1 < stats.counts.size else ["", "", ""]
            )
            rows.append(
                ["subblock", block_id, bx, by, bz, s, int(stats.counts[s])]
                + [float(v) for v in stats.means[s]]
                + [float(v) for v in stats.variances[s]]
                + gamma
            )
    return rows


def render_wss_csv(rows) -> str:
    lines = [",".join(WSS_HEADER)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"

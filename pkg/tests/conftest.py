import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pcwf import surrogate, synthetic
from pcwf.cloud import PointCloud, sort_by_morton

# Index-table fixture: a 3x3x3 cube with eight occupied positions.  Labels
# follow the occupancy map of the worked example this layout reproduces;
# subscripts are (x, y, z) coordinates used directly.
FIG6_POSITIONS = {
    "A": (1, 1, 1),
    "B": (2, 1, 1),
    "C": (3, 3, 1),
    "D": (2, 2, 2),
    "E": (3, 2, 2),
    "F": (1, 3, 2),
    "G": (1, 1, 3),
    "I": (2, 3, 3),
}


@pytest.fixture(scope="session")
def fig6_cloud():
    labels = sorted(FIG6_POSITIONS)
    positions = np.array([FIG6_POSITIONS[k] for k in labels], dtype=np.int64)
    colors = np.array(
        [[20 * (i + 1), 100 + i, 200 - i] for i in range(len(labels))],
        dtype=np.uint8,
    )
    cloud = PointCloud(positions, colors)
    attr_of = {label: tuple(int(v) for v in colors[i])
               for i, label in enumerate(labels)}
    return cloud, attr_of


def random_cloud(rng, max_size=16, density_range=(0.2, 1.0), coord_offset=0):
    """Random voxel subset of a cube with random 3-channel attributes."""
    size = int(rng.integers(4, max_size + 1))
    grid = np.stack(
        np.meshgrid(*[np.arange(size)] * 3, indexing="ij"), axis=-1
    ).reshape(-1, 3)
    keep = rng.random(len(grid)) < rng.uniform(*density_range)
    if keep.sum() < 4:
        keep[:4] = True
    positions = grid[keep] + coord_offset
    colors = rng.integers(0, 256, size=(keep.sum(), 3)).astype(np.uint8)
    return PointCloud(positions, colors)


def noisy_pair(rng, max_size=16, noise=6, coord_offset=0):
    """(original, reconstructed) with uniform integer noise on every channel."""
    original = random_cloud(rng, max_size=max_size, coord_offset=coord_offset)
    jitter = rng.integers(-noise, noise + 1, size=original.colors.shape)
    recon_colors = np.clip(
        original.colors.astype(np.int64) + jitter, 0, 255
    ).astype(np.uint8)
    reconstructed = original.with_colors(recon_colors)
    return original, reconstructed


@pytest.fixture(scope="session")
def demo_sequence():
    seq = synthetic.generate_sequence(n_frames=8, seed=7, size=16, gof_size=8)
    return list(seq.frames)


@pytest.fixture(scope="session")
def demo_reconstructions(demo_sequence):
    """Anchor reconstructions of the demo sequence for the six sweep QPs."""
    out = {}
    for qp in (51, 46, 40, 34, 28, 22):
        cfg = surrogate.QuantizerConfig(qp=qp)
        recons = []
        bits = []
        reference = None
        for i, frame in enumerate(demo_sequence):
            frame = sort_by_morton(frame)
            if i == 0:
                recon = surrogate.intra_code(frame, cfg)
                frame_bits = surrogate.intra_bits(frame, cfg)
            else:
                recon, frame_bits, _ = surrogate.inter_code(frame, reference, cfg)
            recons.append(recon)
            bits.append(frame_bits)
            reference = recon
        out[qp] = (recons, bits)
    return out

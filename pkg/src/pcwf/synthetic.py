"""Seeded synthetic test sequences.

Frames share a solid cubic geometry; the Luma channel is a smooth spatial
gradient with a textured half and a small per-frame brightness drift, plus
low-amplitude noise.  The smooth/textured split populates several variance
classes, and the drift keeps consecutive frames similar but not identical,
which is what group-wise coefficient reuse needs to be a meaningful test.
"""

from __future__ import annotations

import numpy as np

from .cloud import FrameSequence, PointCloud


def cube_positions(size: int) -> np.ndarray:
    axis = np.arange(size)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    return grid.reshape(-1, 3).astype(np.int64)


def generate_sequence(
    n_frames: int = 8,
    seed: int = 7,
    size: int = 16,
    gof_size: int = 8,
    noise_amplitude: float = 2.0,
) -> FrameSequence:
    """Deterministic drifting sequence on a solid size^3 cube."""
    if n_frames < 1:
        raise ValueError("need at least one frame")
    rng = np.random.default_rng(seed)
    pos = cube_positions(size)
    x, y, z = (pos[:, i].astype(np.float64) for i in range(3))
    span = max(3 * (size - 1), 1)
    axis_span = max(size - 1, 1)
    gradient = 58.0 + 128.0 * (x + y + z) / span
    texture = 22.0 * np.sin(1.9 * x) * np.cos(1.3 * y + 0.7 * z)
    textured_half = (x >= size / 2).astype(np.float64)
    # Chroma gradients are wide and off-center so that every quantizer step
    # of the sweep lands on a distinct reconstruction (keeps rate-distortion
    # curves strictly monotone even on small test cubes).
    cb_base = 72.0 + 56.0 * x / axis_span + 10.0 * np.sin(0.9 * y)
    cr_base = 150.0 - 52.0 * y / axis_span + 8.0 * np.cos(1.1 * z)
    frames = []
    for t in range(n_frames):
        drift = 2.5 * t
        noise = rng.normal(0.0, noise_amplitude, size=pos.shape[0])
        luma = gradient + textured_half * texture + drift + noise
        cb = cb_base + 0.6 * t + rng.normal(0.0, 1.0, pos.shape[0])
        cr = cr_base - 0.5 * t + rng.normal(0.0, 1.0, pos.shape[0])
        colors = np.clip(
            np.rint(np.stack([luma, cb, cr], axis=1)), 0, 255
        ).astype(np.uint8)
        frames.append(PointCloud(pos, colors))
    return FrameSequence(frames=frames, gof_size=gof_size)

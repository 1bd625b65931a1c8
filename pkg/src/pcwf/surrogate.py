"""Stand-in attribute codec: uniform-quantization intra frames, residual-coded
inter frames, and the distortion-propagation algebra used to reason about
reference-quality effects.

The quantizer step follows an exponential QP law and is rounded to a whole
number so reconstructed attributes stay exact 8-bit integers; rate is an
order-0 empirical entropy estimate of the quantized residual symbols, which
is deterministic and adequate for monotonicity checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import morton
from .cloud import PointCloud, ValidationError, round_half_away, sort_by_morton
from .neighbors import IndexTable


@dataclass(frozen=True)
class QuantizerConfig:
    qp: int

    @property
    def qstep(self) -> int:
        # Rounded to an integer so dequantized values stay on the 8-bit grid
        # and the qstep/2 error bound is exact.
        if self.qp < 0:
            raise ValidationError("qp must be non-negative")
        return max(1, int(round_half_away(2.0 ** ((self.qp - 4) / 6.0))))


@dataclass(frozen=True)
class InterFrameRecord:
    """Everything needed to rebuild an inter-coded frame from its reference."""

    mapping: np.ndarray          # current-point serial -> reference serial
    residual_levels: np.ndarray  # (n, 3) quantized residual symbols
    qstep: int

    def reconstruct(self, reference: PointCloud) -> np.ndarray:
        mapped = reference.colors.astype(np.int64)[self.mapping]
        values = mapped + self.residual_levels * self.qstep
        return np.clip(values, 0, 255).astype(np.uint8)


def intra_code(original: PointCloud, cfg: QuantizerConfig) -> PointCloud:
    """Uniform mid-tread quantization of every channel."""
    qstep = cfg.qstep
    a = original.colors.astype(np.float64)
    levels = round_half_away(a / qstep)
    recon = np.clip(levels * qstep, 0, 255).astype(np.uint8)
    return original.with_colors(recon)


def intra_bits(original: PointCloud, cfg: QuantizerConfig) -> float:
    """Entropy estimate of an intra frame's quantization levels (all channels)."""
    qstep = cfg.qstep
    levels = round_half_away(original.colors.astype(np.float64) / qstep)
    return sum(entropy_bits(levels[:, c]) for c in range(3))


def entropy_bits(symbols: np.ndarray) -> float:
    """Order-0 empirical entropy of a symbol array, in bits."""
    flat = np.asarray(symbols).ravel()
    if flat.size == 0:
        return 0.0
    _, counts = np.unique(flat, return_counts=True)
    p = counts / flat.size
    return float(-(counts * np.log2(p)).sum())


def map_nearest_voxel(cur: PointCloud, ref: PointCloud,
                      table: Optional[IndexTable] = None) -> np.ndarray:
    """Deterministic correspondence: exact position hit, else the first
    occupied voxel found on expanding Chebyshev shells probed in sorted
    (dx, dy, dz) order."""
    if table is None:
        table = IndexTable(ref)
    serials = np.empty(cur.n, dtype=np.int64)
    max_radius = int(
        max(ref.positions.max(), cur.positions.max())
        - min(ref.positions.min(), cur.positions.min())
    ) + 1
    limit = morton.COORD_LIMIT
    for i, (x, y, z) in enumerate(cur.positions):
        x, y, z = int(x), int(y), int(z)
        hit = table.lookup(morton.encode(x, y, z))
        radius = 1
        while hit is None and radius <= max_radius:
            for dx in range(-radius, radius + 1):
                for dy in range(-radius, radius + 1):
                    for dz in range(-radius, radius + 1):
                        if max(abs(dx), abs(dy), abs(dz)) != radius:
                            continue
                        tx, ty, tz = x + dx, y + dy, z + dz
                        if not (0 <= tx < limit and 0 <= ty < limit
                                and 0 <= tz < limit):
                            continue
                        hit = table.lookup(morton.encode(tx, ty, tz))
                        if hit is not None:
                            break
                    if hit is not None:
                        break
                if hit is not None:
                    break
            radius += 1
        if hit is None:
            raise ValidationError("no reference voxel reachable for mapping")
        serials[i] = hit
    return serials


def inter_code(
    original_cur: PointCloud,
    reconstructed_ref: PointCloud,
    cfg: QuantizerConfig,
) -> tuple[PointCloud, float, InterFrameRecord]:
    """Predict the current frame from the reference, quantize the residual.

    Returns the reconstructed frame, the entropy-estimate of the residual
    bits (summed over the three channels), and the inter-frame record.
    """
    if not isinstance(original_cur, PointCloud) or not isinstance(
        reconstructed_ref, PointCloud
    ):
        raise ValidationError("inter coding needs PointCloud frames")
    cur = sort_by_morton(original_cur)
    ref = sort_by_morton(reconstructed_ref)
    if cur.n == ref.n and np.array_equal(cur.positions, ref.positions):
        mapping = np.arange(cur.n, dtype=np.int64)
    else:
        mapping = map_nearest_voxel(cur, ref)
    qstep = cfg.qstep
    predicted = ref.colors.astype(np.int64)[mapping]
    delta = cur.colors.astype(np.int64) - predicted
    levels = round_half_away(delta.astype(np.float64) / qstep).astype(np.int64)
    record = InterFrameRecord(mapping=mapping, residual_levels=levels, qstep=qstep)
    recon = cur.with_colors(record.reconstruct(ref))
    bits = sum(entropy_bits(levels[:, c]) for c in range(3))
    return recon, bits, record


def propagation_identity_check(
    attr_cur: np.ndarray,
    attr_ref: np.ndarray,
    recon_ref: np.ndarray,
    delta: np.ndarray,
) -> float:
    """Max absolute gap between the direct coding error of the current frame
    and its reference-propagated form, when the prediction error is exact.

    With recon_cur = recon_ref + delta and d_ref = attr_ref - recon_ref, the
    direct error attr_cur - recon_cur must equal
    attr_cur - attr_ref - delta + d_ref identically.
    """
    arrays = [np.asarray(a, dtype=np.float64)
              for a in (attr_cur, attr_ref, recon_ref, delta)]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"shape mismatch among inputs: {sorted(shapes)}")
    attr_cur, attr_ref, recon_ref, delta = arrays
    recon_cur = recon_ref + delta
    d_ref = attr_ref - recon_ref
    direct = attr_cur - recon_cur
    propagated = attr_cur - attr_ref - delta + d_ref
    return float(np.abs(direct - propagated).max())

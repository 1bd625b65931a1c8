"""Variance-based Luma point classification.

Each point is scored by the population variance of its 7-value Luma
neighborhood row (fallback values included as-is) and binned into one of
five categories with fixed thresholds.  Boundaries are lower-inclusive so
both codec sides bin identically.
"""

from __future__ import annotations

import numpy as np

THRESHOLDS = (10.0, 20.0, 40.0, 60.0)
N_CLASSES = 5


def point_variance(luma_rows: np.ndarray) -> np.ndarray:
    """Population variance of each 7-value row: mean of squared deviations."""
    rows = np.asarray(luma_rows, dtype=np.float64)
    squeeze = rows.ndim == 1
    if squeeze:
        rows = rows[np.newaxis, :]
    mu = rows.mean(axis=1, keepdims=True)
    v = np.square(rows - mu).mean(axis=1)
    return float(v[0]) if squeeze else v


def categorize(variance) -> np.ndarray:
    """Class ids 1..5; class j covers [t_{j-1}, t_j) with t_0=0, t_5=inf."""
    v = np.asarray(variance, dtype=np.float64)
    if np.any(v < 0.0):
        raise ValueError("variance cannot be negative")
    ids = np.digitize(v, THRESHOLDS) + 1
    if np.ndim(variance) == 0:
        return int(ids)
    return ids.astype(np.int64)


def classify_rows(luma_rows: np.ndarray) -> np.ndarray:
    """Variance then category for every row of a Luma neighbor matrix."""
    return categorize(point_variance(luma_rows))

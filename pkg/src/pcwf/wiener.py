"""Least-squares coefficient estimation and filtering for one color component.

The filter output for a point is the dot product of its 7-column neighbor
row with a coefficient vector.  Coefficients come from the normal equations
of the in-sample least-squares problem: gram matrix and cross-correlation
accumulated over all points, solved by a ridge-stabilized Cholesky
factorization.  The identity filter (pass-through) is always representable,
so a solved filter can be validated against "do nothing".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import round_half_away

FILTER_ORDER = 7

# Scale-relative ridge: neighbor fallbacks duplicate column 0 on sparse
# clouds, which makes the gram matrix exactly singular.
RIDGE_SCALE = 1e-6


@dataclass(frozen=True)
class NormalEquation:
    """Sufficient statistics of the least-squares fit for one component."""

    gram: np.ndarray       # (k, k) symmetric PSD
    cross: np.ndarray      # (k,)
    target_energy: float   # sum of squared target values
    sample_count: int


@dataclass(frozen=True)
class FilterCoefficients:
    taps: np.ndarray  # (k,) float64
    degraded: bool = False


def identity_taps(k: int = FILTER_ORDER) -> np.ndarray:
    taps = np.zeros(k, dtype=np.float64)
    taps[0] = 1.0
    return taps


def accumulate(rows: np.ndarray, target: np.ndarray) -> NormalEquation:
    """Build the normal equations from (n, k) rows and the n original values."""
    rows = np.asarray(rows, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError(f"rows must be 2-D, got shape {rows.shape}")
    if target.shape != (rows.shape[0],):
        raise ValueError(
            f"target length {target.shape} does not match {rows.shape[0]} rows"
        )
    gram = rows.T @ rows
    cross = rows.T @ target
    return NormalEquation(
        gram=gram,
        cross=cross,
        target_energy=float(target @ target),
        sample_count=rows.shape[0],
    )


def solve(eq: NormalEquation, ridge_scale: float = RIDGE_SCALE) -> FilterCoefficients:
    """Solve (gram + eps*I) h = cross with eps = ridge_scale * trace / k.

    Never raises: an indefinite system or a non-finite solution degrades to
    the identity filter, which makes the subsequent apply a no-op.
    """
    k = eq.gram.shape[0]
    eps = ridge_scale * float(np.trace(eq.gram)) / k
    system = eq.gram + eps * np.eye(k)
    try:
        lower = np.linalg.cholesky(system)
        taps = np.linalg.solve(lower.T, np.linalg.solve(lower, eq.cross))
    except np.linalg.LinAlgError:
        return FilterCoefficients(identity_taps(k), degraded=True)
    if not np.all(np.isfinite(taps)):
        return FilterCoefficients(identity_taps(k), degraded=True)
    return FilterCoefficients(taps, degraded=False)


def residual_energy(eq: NormalEquation, taps: np.ndarray) -> float:
    """In-sample sum of squared errors for a candidate tap vector.

    Expands ||target - rows @ taps||^2 from the accumulated statistics, so
    no pass over the data is needed.
    """
    taps = np.asarray(taps, dtype=np.float64)
    return float(
        eq.target_energy - 2.0 * (taps @ eq.cross) + taps @ eq.gram @ taps
    )


def apply(rows: np.ndarray, coefficients: FilterCoefficients):
    """Filter rows; returns (rounded uint8 values, pre-rounding reals)."""
    rows = np.asarray(rows, dtype=np.float64)
    taps = coefficients.taps
    if rows.shape[1] != taps.shape[0]:
        raise ValueError(
            f"row width {rows.shape[1]} does not match {taps.shape[0]} taps"
        )
    real = rows @ taps
    rounded = np.clip(round_half_away(real), 0, 255).astype(np.uint8)
    return rounded, real


def mse(x: np.ndarray, y: np.ndarray) -> float:
    """Mean of squared differences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(d @ d) / x.size


def sse(x: np.ndarray, y: np.ndarray) -> float:
    """Sum of squared differences (the distortion unit of the RD gate)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(d @ d)

"""Quality and cost metrics: PSNR, weighted PSNR, BD-rate, complexity ratio.

Rates are bits per output point; BD-rate uses the classic cubic polynomial
fit of log10(rate) against quality, integrated over the overlapping quality
interval (negative: the test curve is cheaper at equal quality).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

PEAK = 255.0
WEIGHTS = (7.0, 1.0, 1.0)


@dataclass(frozen=True)
class RatePoint:
    bpop: float
    psnr: float

    def __post_init__(self):
        if not self.bpop > 0:
            raise ValueError("bpop must be positive")


def psnr(original, candidate, peak: float = PEAK) -> float:
    """10*log10(peak^2 * n / SSE); +inf when the signals are identical."""
    x = np.asarray(original, dtype=np.float64)
    y = np.asarray(candidate, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    d = (x - y).ravel()
    total = float(d @ d)
    if total == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak * d.size / total)


def psnr_from_sse(total_sse: float, count: int, peak: float = PEAK) -> float:
    if total_sse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak * count / total_sse)


def weighted_psnr(psnr_luma: float, psnr_cb: float, psnr_cr: float) -> float:
    """7:1:1 weighted average of the component PSNRs."""
    w1, w2, w3 = WEIGHTS
    return (w1 * psnr_luma + w2 * psnr_cb + w3 * psnr_cr) / (w1 + w2 + w3)


def _fit_log_rate(points) -> np.ndarray:
    quality = np.array([p.psnr for p in points], dtype=np.float64)
    log_rate = np.log10([p.bpop for p in points])
    # Cubic fit via the normal equations of the Vandermonde system.
    v = np.vander(quality, 4)
    coeff, *_ = np.linalg.lstsq(v, log_rate, rcond=None)
    return coeff


def _integrate_poly(coeff: np.ndarray, lo: float, hi: float) -> float:
    antiderivative = np.polyint(coeff)
    return float(np.polyval(antiderivative, hi) - np.polyval(antiderivative, lo))


def bd_rate(curve_anchor, curve_test) -> float:
    """Average rate difference (percent) of curve_test against curve_anchor."""
    for name, curve in (("anchor", curve_anchor), ("test", curve_test)):
        if len(curve) < 4:
            raise ValueError(f"{name} curve needs at least 4 rate points")
        q = [p.psnr for p in curve]
        r = [p.bpop for p in curve]
        if not all(math.isfinite(v) for v in q):
            raise ValueError(f"{name} curve has non-finite quality values")
        order = np.argsort(r)
        r_sorted = np.asarray(r)[order]
        q_sorted = np.asarray(q)[order]
        if not (np.all(np.diff(r_sorted) > 0) and np.all(np.diff(q_sorted) > 0)):
            raise ValueError(f"{name} curve is not strictly monotone")
    lo = max(min(p.psnr for p in curve_anchor), min(p.psnr for p in curve_test))
    hi = min(max(p.psnr for p in curve_anchor), max(p.psnr for p in curve_test))
    if not hi > lo:
        raise ValueError("curves do not overlap in quality")
    int_anchor = _integrate_poly(_fit_log_rate(curve_anchor), lo, hi)
    int_test = _integrate_poly(_fit_log_rate(curve_test), lo, hi)
    avg_diff = (int_test - int_anchor) / (hi - lo)
    return (10.0 ** avg_diff - 1.0) * 100.0


def complexity_ratio(t_proposed: float, t_anchor: float) -> float:
    """Runtime of the proposed path as a percentage of the anchor's."""
    if t_anchor <= 0:
        raise ValueError("anchor time must be positive")
    return 100.0 * t_proposed / t_anchor


def format_value(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return format(value, ".10g")
    return str(value)


def write_csv(path, header, rows) -> None:
    """Deterministic CSV emission: fixed float formatting, newline-stable."""
    with open(path, "w", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_csv(path):
    with open(path, newline="") as stream:
        reader = csv.reader(stream)
        header = next(reader)
        return header, [row for row in reader]

"""Lagrangian rate-distortion gate for per-component filter flags.

The filtered branch pays its coefficient payload plus its own flag bit; the
unfiltered branch pays the flag bit alone.  Ties keep the filter off, so the
selected branch never costs more than not filtering.
"""

from __future__ import annotations

from dataclasses import dataclass


def lagrange_multiplier(qp: int) -> float:
    """QP-coupled multiplier: 0.85 * 2**((qp - 12) / 3)."""
    if qp < 0:
        raise ValueError("qp must be non-negative")
    return 0.85 * 2.0 ** ((qp - 12) / 3.0)


def rd_cost(distortion_sse: float, rate_bits: float, lam: float) -> float:
    """Cost = D + lambda * R."""
    return distortion_sse + lam * rate_bits


@dataclass(frozen=True)
class RdDecision:
    flag: bool
    cost_filtered: float
    cost_unfiltered: float
    coeff_bits: int


def decide(
    d_unfiltered: float, d_filtered: float, coeff_bits: int, lam: float
) -> RdDecision:
    """Gate one coefficient set.

    coeff_bits is the filtered branch's total side-information in bits (its
    flag bit plus any serialized coefficients); the unfiltered branch is
    charged one flag bit.
    """
    cost_filtered = rd_cost(d_filtered, coeff_bits, lam)
    cost_unfiltered = rd_cost(d_unfiltered, 1.0, lam)
    return RdDecision(
        flag=cost_filtered < cost_unfiltered,
        cost_filtered=cost_filtered,
        cost_unfiltered=cost_unfiltered,
        coeff_bits=coeff_bits,
    )

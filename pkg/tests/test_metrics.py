import math

import numpy as np
import pytest

from pcwf import metrics
from pcwf.metrics import RatePoint

import oracles


def test_psnr_identical_is_infinite():
    x = np.arange(100, dtype=np.float64)
    assert metrics.psnr(x, x) == math.inf


def test_psnr_uniform_unit_error_golden():
    x = np.zeros(1000)
    y = np.ones(1000)
    # Independent evaluation: 10*log10(255^2).
    expected = 10.0 * math.log10(255.0 ** 2)
    assert expected == pytest.approx(48.1308, abs=1e-2)
    assert metrics.psnr(x, y) == pytest.approx(expected, abs=1e-9)


def test_psnr_matches_loop_oracle():
    rng = np.random.default_rng(10)
    x = rng.uniform(0, 255, 500)
    y = rng.uniform(0, 255, 500)
    assert metrics.psnr(x, y) == pytest.approx(
        oracles.psnr_loop(x, y), abs=1e-9
    )
    with pytest.raises(ValueError):
        metrics.psnr(x, y[:10])


def test_psnr_strictly_decreases_with_sse():
    n = 256
    values = [metrics.psnr_from_sse(s, n) for s in (10.0, 100.0, 1000.0)]
    assert values[0] > values[1] > values[2]


def test_weighted_psnr():
    assert metrics.weighted_psnr(42.0, 42.0, 42.0) == 42.0
    assert metrics.weighted_psnr(45.0, 50.0, 50.0) == pytest.approx(46.11, abs=1e-2)
    assert metrics.weighted_psnr(40.0, 40.0, 49.0) == pytest.approx(41.0, abs=1e-9)


def _curve(bpops, psnrs):
    return [RatePoint(bpop=b, psnr=q) for b, q in zip(bpops, psnrs)]


def test_bd_rate_identical_curves_is_zero():
    curve = _curve([0.5, 1.0, 2.0, 4.0], [30.0, 33.0, 36.0, 39.0])
    assert metrics.bd_rate(curve, curve) == pytest.approx(0.0, abs=1e-9)


def test_bd_rate_half_rate_is_minus_fifty():
    anchor = _curve([0.5, 1.0, 2.0, 4.0], [30.0, 33.0, 36.0, 39.0])
    test = _curve([0.25, 0.5, 1.0, 2.0], [30.0, 33.0, 36.0, 39.0])
    assert metrics.bd_rate(anchor, test) == pytest.approx(-50.0, abs=1e-6)


def test_bd_rate_fixed_instance_matches_polyfit_oracle():
    anchor = _curve([0.31, 0.74, 1.62, 3.5], [29.1, 32.4, 35.0, 38.2])
    test = _curve([0.27, 0.66, 1.51, 3.1], [29.6, 32.9, 35.8, 38.9])
    value = metrics.bd_rate(anchor, test)
    assert value == pytest.approx(oracles.bd_rate_polyfit(anchor, test), abs=1e-3)


def test_bd_rate_uniform_scaling_shifts_exactly():
    anchor = _curve([0.31, 0.74, 1.62, 3.5], [29.1, 32.4, 35.0, 38.2])
    scaled = [RatePoint(bpop=p.bpop * 1.25, psnr=p.psnr) for p in anchor]
    assert metrics.bd_rate(anchor, scaled) == pytest.approx(25.0, abs=1e-6)


def test_bd_rate_input_validation():
    short = _curve([1.0, 2.0, 3.0], [30.0, 33.0, 36.0])
    with pytest.raises(ValueError):
        metrics.bd_rate(short, short)
    non_monotone = _curve([0.5, 1.0, 2.0, 4.0], [30.0, 29.0, 36.0, 39.0])
    with pytest.raises(ValueError):
        metrics.bd_rate(non_monotone, non_monotone)
    low = _curve([0.5, 1.0, 2.0, 4.0], [10.0, 11.0, 12.0, 13.0])
    high = _curve([0.5, 1.0, 2.0, 4.0], [30.0, 33.0, 36.0, 39.0])
    with pytest.raises(ValueError):
        metrics.bd_rate(low, high)


def test_complexity_ratio():
    assert metrics.complexity_ratio(5.0, 5.0) == 100.0
    assert metrics.complexity_ratio(1.11, 1.0) == pytest.approx(111.0)
    assert metrics.complexity_ratio(0.0, 3.0) == 0.0
    with pytest.raises(ValueError):
        metrics.complexity_ratio(1.0, 0.0)


def test_rate_point_rejects_nonpositive_rate():
    with pytest.raises(ValueError):
        RatePoint(bpop=0.0, psnr=30.0)


def test_csv_round_trip(tmp_path):
    path = tmp_path / "table.csv"
    rows = [[1, 2.5, math.inf, "x"], [2, 0.1, 3.0, "y"]]
    metrics.write_csv(path, ("a", "b", "c", "d"), rows)
    header, parsed = metrics.read_csv(path)
    assert header == ["a", "b", "c", "d"]
    assert float(parsed[0][2]) == math.inf
    assert parsed[1][3] == "y"
    again = tmp_path / "again.csv"
    metrics.write_csv(again, ("a", "b", "c", "d"), rows)
    assert path.read_bytes() == again.read_bytes()

import numpy as np
import pytest

from pcwf import wiener
from pcwf.cloud import sort_by_morton
from pcwf.neighbors import build_index, gather_neighbors

import oracles
from conftest import noisy_pair


def test_accumulate_single_constant_row():
    eq = wiener.accumulate(np.full((1, 7), 5.0), np.array([5.0]))
    assert np.array_equal(eq.gram, np.full((7, 7), 25.0))
    # cross = row^T * target: every entry 5 * 5.
    assert np.array_equal(eq.cross, np.full(7, 25.0))
    assert eq.target_energy == 25.0
    assert eq.sample_count == 1


def test_accumulate_zero_attributes():
    eq = wiener.accumulate(np.zeros((4, 7)), np.zeros(4))
    assert not eq.gram.any()
    assert not eq.cross.any()


def test_accumulate_matches_naive_oracle():
    rng = np.random.default_rng(64)
    rows = rng.uniform(0, 255, size=(64, 7))
    target = rng.uniform(0, 255, size=64)
    eq = wiener.accumulate(rows, target)
    gram, cross = oracles.naive_normal_equation(rows, target)
    assert np.allclose(eq.gram, gram, rtol=1e-12)
    assert np.allclose(eq.cross, cross, rtol=1e-12)


def test_accumulate_length_mismatch():
    with pytest.raises(ValueError):
        wiener.accumulate(np.zeros((3, 7)), np.zeros(4))


def test_solve_scalar_normal_equation():
    # Zero out every neighbor column: the system degenerates to one unknown.
    rng = np.random.default_rng(2)
    recon = rng.uniform(1, 255, size=32)
    target = rng.uniform(1, 255, size=32)
    rows = np.zeros((32, 7))
    rows[:, 0] = recon
    eq = wiener.accumulate(rows, target)
    eps = wiener.RIDGE_SCALE * np.trace(eq.gram) / 7
    coeff = wiener.solve(eq)
    expected = float(recon @ target) / (float(recon @ recon) + eps)
    assert not coeff.degraded
    assert coeff.taps[0] == pytest.approx(expected, abs=1e-12)


def test_solve_matches_generic_least_squares_oracle():
    rng = np.random.default_rng(5)
    rows = rng.uniform(0, 255, size=(5, 7))
    target = rng.uniform(0, 255, size=5)
    coeff = wiener.solve(wiener.accumulate(rows, target))
    expected = oracles.ridge_lstsq(rows, target)
    assert np.abs(coeff.taps - expected).max() < 1e-8


def test_solve_degrades_to_identity_on_zero_system():
    coeff = wiener.solve(wiener.accumulate(np.zeros((3, 7)), np.zeros(3)))
    assert coeff.degraded
    assert np.array_equal(coeff.taps, wiener.identity_taps())


def test_residual_orthogonality_on_solved_system():
    rng = np.random.default_rng(21)
    rows = rng.uniform(0, 255, size=(128, 7))
    target = rng.uniform(0, 255, size=128)
    eq = wiener.accumulate(rows, target)
    coeff = wiener.solve(eq)
    eps = wiener.RIDGE_SCALE * np.trace(eq.gram) / 7
    residual = eq.cross - eq.gram @ coeff.taps
    bound = eps * np.abs(coeff.taps).max() + 1e-6
    assert np.abs(residual).max() <= bound


def test_apply_identity_reproduces_input():
    rng = np.random.default_rng(3)
    rows = rng.integers(0, 256, size=(50, 7)).astype(np.float64)
    rounded, real = wiener.apply(rows, wiener.FilterCoefficients(wiener.identity_taps()))
    assert np.array_equal(real, rows[:, 0])
    assert np.array_equal(rounded, rows[:, 0].astype(np.uint8))


def test_apply_constant_cloud_unit_gain():
    rows = np.full((10, 7), 97.0)
    taps = np.array([0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])
    rounded, real = wiener.apply(rows, wiener.FilterCoefficients(taps))
    assert np.allclose(real, 97.0)
    assert np.all(rounded == 97)


def test_apply_matches_dot_product_oracle():
    rng = np.random.default_rng(4)
    rows = rng.uniform(0, 255, size=(40, 7))
    taps = rng.uniform(-1, 1.5, size=7)
    _, real = wiener.apply(rows, wiener.FilterCoefficients(taps))
    assert np.allclose(real, oracles.naive_dot_rows(rows, taps), rtol=1e-12)


def test_apply_rounds_and_clamps():
    rows = np.zeros((2, 7))
    rows[0, 0] = 255.0
    rows[1, 0] = 1.0
    taps = np.zeros(7)
    taps[0] = 1.5
    rounded, real = wiener.apply(rows, wiener.FilterCoefficients(taps))
    assert real[0] == pytest.approx(382.5)
    assert rounded[0] == 255
    assert rounded[1] == 2  # 1.5 rounds away from zero


def test_mse_values():
    assert wiener.mse(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert wiener.mse(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 12.5
    rng = np.random.default_rng(6)
    x = rng.uniform(0, 255, 100)
    y = rng.uniform(0, 255, 100)
    assert wiener.mse(x, y) == pytest.approx(oracles.naive_mse(x, y), rel=1e-12)
    with pytest.raises(ValueError):
        wiener.mse(x, y[:50])


def test_reconstruction_equal_to_original_round_trips():
    rng = np.random.default_rng(15)
    original, _ = noisy_pair(rng, noise=0)
    cloud = sort_by_morton(original)
    matrix = gather_neighbors(cloud, build_index(cloud))
    for c in range(3):
        target = cloud.colors[:, c].astype(np.float64)
        coeff = wiener.solve(wiener.accumulate(matrix.values[c], target))
        rounded, _ = wiener.apply(matrix.values[c], coeff)
        assert np.array_equal(rounded, cloud.colors[:, c])


def test_in_sample_optimality_never_worse():
    rng = np.random.default_rng(404)
    for _ in range(25):
        original, reconstructed = noisy_pair(rng)
        orig = sort_by_morton(original)
        recon = sort_by_morton(reconstructed)
        matrix = gather_neighbors(recon, build_index(recon))
        for c in range(3):
            target = orig.colors[:, c].astype(np.float64)
            coeff = wiener.solve(wiener.accumulate(matrix.values[c], target))
            _, real = wiener.apply(matrix.values[c], coeff)
            mse_filtered = wiener.mse(target, real)
            mse_recon = wiener.mse(target, recon.colors[:, c].astype(np.float64))
            assert mse_filtered <= mse_recon * (1 + 1e-9) + 1e-12

import itertools

import numpy as np
import pytest

from pcwf import morton
from pcwf.cloud import PointCloud, ValidationError, sort_by_morton
from pcwf.neighbors import (
    IndexTable,
    brute_force_neighbors,
    build_index,
    gather_neighbors,
)

import oracles
from conftest import FIG6_POSITIONS, noisy_pair, random_cloud

DELTAS = [entry.delta for entry in morton.SEARCH_TABLE]


def _matrices_equal(a, b):
    return np.array_equal(a.values, b.values) and np.array_equal(
        a.occupied, b.occupied
    )


def test_index_table_reproduces_occupancy_map(fig6_cloud):
    cloud, _ = fig6_cloud
    cloud = sort_by_morton(cloud)
    table = build_index(cloud)
    serial_of_position = {
        tuple(int(v) for v in p): i for i, p in enumerate(cloud.positions)
    }
    occupied = {tuple(p) for p in FIG6_POSITIONS.values()}
    probed = 0
    for pos in itertools.product((1, 2, 3), repeat=3):
        code = morton.encode(*pos)
        serial = table.lookup(code)
        probed += 1
        if pos in occupied:
            assert serial == serial_of_position[pos]
        else:
            assert serial is None
    assert probed == 27
    assert sum(1 for p in itertools.product((1, 2, 3), repeat=3)
               if table.lookup(morton.encode(*p)) is not None) == 8


def test_index_single_point_cloud():
    cloud = PointCloud(np.array([[0, 0, 0]]), np.array([[7, 8, 9]], np.uint8))
    table = build_index(sort_by_morton(cloud))
    assert table.lookup(0) == 0
    for code in range(1, 64):
        assert table.lookup(code) is None


def test_index_requires_sorted_cloud(fig6_cloud):
    cloud, _ = fig6_cloud
    assert not cloud.morton_sorted
    with pytest.raises(ValidationError):
        build_index(cloud)


def test_dense_and_hash_backings_agree():
    rng = np.random.default_rng(31)
    # Same geometry twice: near the origin (dense) and far away (hashed).
    base = sort_by_morton(random_cloud(rng, max_size=12))
    shifted = sort_by_morton(
        PointCloud(base.positions + (1 << 19), base.colors)
    )
    dense_table = build_index(base)
    hash_table = build_index(shifted)
    assert dense_table.dense
    assert not hash_table.dense
    dense_matrix = gather_neighbors(base, dense_table)
    hash_matrix = gather_neighbors(shifted, hash_table)
    assert _matrices_equal(dense_matrix, hash_matrix)
    assert dense_table.n_slices >= 1


def test_gather_single_point_all_virtual():
    cloud = sort_by_morton(
        PointCloud(np.array([[3, 3, 3]]), np.array([[100, 128, 128]], np.uint8))
    )
    matrix = gather_neighbors(cloud, build_index(cloud))
    assert np.array_equal(matrix.values[0][0], [100.0] * 7)
    assert np.array_equal(matrix.values[1][0], [128.0] * 7)
    assert not matrix.occupied.any()


def test_gather_fig6_point_d_row(fig6_cloud):
    cloud, attr_of = fig6_cloud
    cloud = sort_by_morton(cloud)
    matrix = gather_neighbors(cloud, build_index(cloud))
    d_serial = int(
        np.nonzero((cloud.positions == FIG6_POSITIONS["D"]).all(axis=1))[0][0]
    )
    # D's only occupied coplanar neighbor is E at delta (1, 0, 0), the first
    # search-table column.
    assert list(matrix.occupied[d_serial]) == [True, False, False, False,
                                               False, False]
    for component in range(3):
        row = matrix.values[component][d_serial]
        assert row[0] == attr_of["D"][component]
        assert row[1] == attr_of["E"][component]
        assert np.array_equal(row[2:], [attr_of["D"][component]] * 5)


def test_gather_two_point_pair_symmetry():
    cloud = sort_by_morton(
        PointCloud(
            np.array([[0, 0, 0], [1, 0, 0]]),
            np.array([[10, 0, 0], [200, 0, 0]], np.uint8),
        )
    )
    matrix = gather_neighbors(cloud, build_index(cloud))
    assert matrix.occupied[0].tolist() == [True, False, False, False, False, False]
    assert matrix.occupied[1].tolist() == [False, False, False, True, False, False]
    assert matrix.values[0][0][1] == 200.0
    assert matrix.values[0][1][4] == 10.0


def test_column_zero_is_self_everywhere():
    rng = np.random.default_rng(8)
    cloud = sort_by_morton(random_cloud(rng))
    matrix = gather_neighbors(cloud, build_index(cloud))
    assert np.array_equal(
        matrix.values[:, :, 0], cloud.colors.astype(np.float64).T
    )


def test_virtual_columns_equal_self():
    rng = np.random.default_rng(9)
    cloud = sort_by_morton(random_cloud(rng, density_range=(0.1, 0.4)))
    matrix = gather_neighbors(cloud, build_index(cloud))
    for j in range(6):
        miss = ~matrix.occupied[:, j]
        assert np.array_equal(
            matrix.values[:, miss, j + 1], matrix.values[:, miss, 0]
        )


def test_gather_matches_dict_oracle():
    rng = np.random.default_rng(1001)
    cloud = sort_by_morton(random_cloud(rng, max_size=16))
    matrix = gather_neighbors(cloud, build_index(cloud))
    values, occupied = oracles.knn_dict(cloud.positions, cloud.colors, DELTAS)
    assert np.array_equal(matrix.values, values)
    assert np.array_equal(matrix.occupied, occupied)


def test_brute_force_equivalence_on_random_clouds():
    rng = np.random.default_rng(77)
    for _ in range(10):
        offset = int(rng.integers(0, 2)) * int(rng.integers(0, 1 << 16))
        cloud = sort_by_morton(random_cloud(rng, coord_offset=offset))
        fast = gather_neighbors(cloud, build_index(cloud))
        slow = brute_force_neighbors(cloud)
        assert _matrices_equal(fast, slow)


def test_gather_is_deterministic():
    rng = np.random.default_rng(13)
    cloud = sort_by_morton(random_cloud(rng))
    a = gather_neighbors(cloud, build_index(cloud))
    b = gather_neighbors(cloud, build_index(cloud))
    assert a.values.tobytes() == b.values.tobytes()
    assert a.occupied.tobytes() == b.occupied.tobytes()


def test_table_cloud_mismatch_rejected(fig6_cloud):
    cloud, _ = fig6_cloud
    cloud = sort_by_morton(cloud)
    table = build_index(cloud)
    other = sort_by_morton(
        PointCloud(np.array([[0, 0, 0]]), np.array([[1, 1, 1]], np.uint8))
    )
    with pytest.raises(ValidationError):
        gather_neighbors(other, table)

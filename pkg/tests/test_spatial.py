import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from epsball.spatial import (
    GridIndex,
    as_sample,
    ball_volume,
    count_cross,
    count_radius_bruteforce,
    count_within,
)


def test_ball_volume_interval():
    assert ball_volume(1, 0.5) == pytest.approx(1.0)


def test_ball_volume_unit_sphere():
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3)


def test_ball_volume_disc():
    assert ball_volume(2, 2.0) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("d,eps", [(0, 1.0), (-1, 1.0), (2, 0.0), (2, -0.5)])
def test_ball_volume_invalid(d, eps):
    with pytest.raises(ValueError):
        ball_volume(d, eps)


def test_as_sample_rejects_nan():
    with pytest.raises(ValueError):
        as_sample([[0.0], [float("nan")]])


def test_count_within_hand_example(kernel):
    c = count_within([[0.0], [0.3], [1.0]], 0.5, kernel=kernel)
    assert c.within.tolist() == [1, 1, 0]
    assert c.pair_total == 1


def test_count_within_all_far(kernel):
    c = count_within([[0.0], [5.0], [10.0]], 0.5, kernel=kernel)
    assert c.within.tolist() == [0, 0, 0]
    assert c.pair_total == 0


def test_count_within_chain(kernel):
    c = count_within([[0.0], [0.3], [0.6], [2.0]], 0.5, kernel=kernel)
    assert c.within.tolist() == [1, 2, 1, 0]
    assert c.pair_total == 2


def test_count_within_duplicates_counted(kernel):
    c = count_within([[1.0], [1.0], [1.0]], 0.1, kernel=kernel)
    assert c.within.tolist() == [2, 2, 2]
    assert c.pair_total == 3


def test_count_cross_hand_example(kernel):
    c = count_cross([[0.0]], [[0.2], [0.9]], 0.5, kernel=kernel)
    assert c.cross.tolist() == [1]
    assert c.cross_total == 1


def test_count_cross_empty_other(kernel):
    c = count_cross([[0.0], [1.0]], np.empty((0, 1)), 0.5, kernel=kernel)
    assert c.cross.tolist() == [0, 0]
    assert c.cross_total == 0


def test_count_cross_identical_samples_include_self(kernel):
    pts = [[0.0], [0.1], [0.2]]
    c = count_cross(pts, pts, 10.0, kernel=kernel)
    assert c.cross.tolist() == [3, 3, 3]


def test_count_cross_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        count_cross([[0.0, 0.0]], [[1.0]], 0.5)


def test_empty_index_returns_zero(kernel):
    idx = GridIndex(np.empty((0, 2)), 0.5, kernel=kernel)
    assert idx.count_radius([[0.0, 0.0]]).tolist() == [0]


def test_boundary_is_excluded(kernel):
    # exactly eps apart: strict inequality excludes
    c = count_within([[0.0], [0.5]], 0.5, kernel=kernel)
    assert c.pair_total == 0


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 7, 200])
def test_index_matches_bruteforce(kernel, d, n):
    rng = np.random.default_rng(n * 10 + d)
    pts = rng.uniform(-1, 1, size=(n, d))
    queries = rng.uniform(-1.2, 1.2, size=(50, d))
    for eps in (0.01, 0.2, 0.7, 3.0):
        idx = GridIndex(pts, eps, kernel=kernel)
        got = idx.count_radius(queries)
        want = count_radius_bruteforce(pts, queries, eps)
        assert np.array_equal(got, want), (d, n, eps)


def test_large_uniform_subsample_crosscheck(kernel):
    rng = np.random.default_rng(7)
    pts = rng.uniform(size=(100_000, 3))
    idx = GridIndex(pts, 0.1, kernel=kernel)
    sub = pts[rng.choice(100_000, size=1000, replace=False)]
    assert np.array_equal(idx.count_radius(sub),
                          count_radius_bruteforce(pts, sub, 0.1))


def test_key_overflow_falls_back_to_brute():
    pts = np.array([[0.0], [1.0], [1e-18]])
    idx = GridIndex(pts, 1e-19)
    assert idx._brute
    assert idx.count_radius(pts).tolist() == [1, 1, 1]


@settings(max_examples=50, deadline=None)
@given(
    pts=hnp.arrays(np.float64, st.tuples(st.integers(0, 40), st.integers(1, 3)),
                   elements=st.floats(-5, 5, allow_nan=False)),
    eps=st.floats(1e-3, 4.0),
)
def test_within_sum_is_twice_pairs(pts, eps):
    c = count_within(pts, eps)
    assert int(c.within.sum()) == 2 * c.pair_total


@settings(max_examples=30, deadline=None)
@given(
    pts=hnp.arrays(np.float64, st.tuples(st.integers(1, 30), st.integers(1, 2)),
                   elements=st.floats(-3, 3, allow_nan=False)),
    eps=st.floats(1e-2, 3.0),
    scale_exp=st.integers(-6, 6),
)
def test_scale_invariance_power_of_two(pts, eps, scale_exp):
    c = 2.0 ** scale_exp
    base = count_within(pts, eps)
    scaled = count_within(c * pts, c * eps)
    assert base.within.tolist() == scaled.within.tolist()
    assert base.pair_total == scaled.pair_total


def test_permutation_invariance(kernel):
    rng = np.random.default_rng(3)
    a = rng.normal(size=(60, 2))
    b = rng.normal(size=(40, 2))
    eps = 0.5
    perm_a = a[rng.permutation(60)]
    perm_b = b[rng.permutation(40)]
    assert count_within(a, eps, kernel=kernel).pair_total == \
        count_within(perm_a, eps, kernel=kernel).pair_total
    assert count_cross(a, b, eps, kernel=kernel).cross_total == \
        count_cross(perm_a, perm_b, eps, kernel=kernel).cross_total


def test_kernels_agree():
    from .conftest import KERNELS
    if len(KERNELS) < 2:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(500, 3))
    results = [count_within(pts, 0.4, kernel=k).within for k in KERNELS]
    assert np.array_equal(results[0], results[1])

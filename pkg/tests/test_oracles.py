"""Baseline oracles: exact DP vs brute force, heuristic bounds, block tours."""

import math

import numpy as np
import pytest

from phaseplace.errors import EmptyInput, TooLarge
from phaseplace.geometry import BlockPartition
from phaseplace.oracles import (
    OracleEstimate,
    bhh_reference,
    block_tour_cost,
    heuristic_path,
    mu_bounds,
    path_cost,
    tsp_path_bruteforce,
    tsp_path_exact,
    tsp_path_heuristic,
)
from phaseplace.rng import uniform_block


def test_exact_matches_bruteforce_on_random_instances():
    t = 0
    for d in (1, 2, 3):
        for n in (2, 3, 5, 8):
            for _ in range(5):
                pts = uniform_block(1000 + t, n * d).reshape(n, d)
                t += 1
                dp = tsp_path_exact(pts)
                bf = tsp_path_bruteforce(pts)
                assert dp.value == pytest.approx(bf.value, abs=1e-9)
                assert dp.kind == bf.kind == "exact"


def test_heuristic_upper_bounds_exact():
    for t in range(20):
        d = 1 + t % 3
        n = 4 + t % 5
        pts = uniform_block(2000 + t, n * d).reshape(n, d)
        ex = tsp_path_exact(pts)
        he = tsp_path_heuristic(pts)
        assert he.kind == "heuristic_upper"
        assert he.value >= ex.value - 1e-9


def test_exact_1d_is_value_span():
    for t in range(10):
        xs = uniform_block(3000 + t, 9).reshape(-1, 1)
        ex = tsp_path_exact(xs[:8])
        assert ex.value == pytest.approx(float(xs[:8].max() - xs[:8].min()), abs=1e-9)


def test_heuristic_exact_on_collinear_points():
    xs = np.array([[0.9], [0.1], [0.5], [0.3], [0.7]])
    he = tsp_path_heuristic(xs)
    assert he.value == pytest.approx(0.8, abs=1e-12)


def test_degenerate_inputs():
    assert tsp_path_exact([[0.5, 0.5]]).value == 0.0
    assert tsp_path_heuristic([[0.5, 0.5]]).value == 0.0
    dup = [[0.3, 0.3]] * 5
    assert tsp_path_exact(dup).value == pytest.approx(0.0, abs=1e-12)
    assert tsp_path_heuristic(dup).value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(EmptyInput):
        tsp_path_exact(np.empty((0, 2)))
    with pytest.raises(EmptyInput):
        tsp_path_heuristic(np.empty((0, 2)))
    with pytest.raises(TooLarge):
        tsp_path_exact(np.zeros((15, 2)))
    with pytest.raises(TooLarge):
        tsp_path_bruteforce(np.zeros((9, 2)))


def test_path_cost_agrees_with_manual_sum():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    assert path_cost(pts, [0, 1, 2]) == pytest.approx(2.0)
    assert path_cost(pts, [1, 0, 2]) == pytest.approx(1.0 + math.sqrt(2.0))


def test_heuristic_path_returns_consistent_order():
    pts = uniform_block(77, 60).reshape(30, 2)
    cost, order = heuristic_path(pts)
    assert sorted(order) == list(range(30))
    assert cost == pytest.approx(path_cost(pts, order), abs=1e-9)


def test_block_tour_single_block_equals_heuristic():
    pts = uniform_block(55, 40).reshape(20, 2)
    part = BlockPartition.build(2, 0)
    assert part.num_blocks == 1
    bt = block_tour_cost(pts, part)
    assert bt.value == pytest.approx(heuristic_path(pts)[0], abs=1e-9)
    assert bt.meta["nonempty_blocks"] == 1


def test_block_tour_one_point_per_block_is_serpentine_path():
    part = BlockPartition.build(2, 2)
    centers = []
    for v in part.coords_by_order():
        centers.append([(vi - 0.5) / ni for vi, ni in zip(v, part.sides)])
    pts = np.array(centers)
    bt = block_tour_cost(pts, part)
    assert bt.value == pytest.approx(path_cost(pts, range(len(pts))), abs=1e-9)
    assert bt.meta["nonempty_blocks"] == part.num_blocks


def test_block_tour_upper_bounds_heuristic():
    part = BlockPartition.build(2, 4)
    for t in range(5):
        pts = uniform_block(500 + t, 2 * 200).reshape(200, 2)
        bt = block_tour_cost(pts, part)
        he = tsp_path_heuristic(pts)
        assert bt.value >= he.value * 0.99


def test_block_tour_dimension_mismatch():
    with pytest.raises(ValueError):
        block_tour_cost(np.zeros((4, 3)), BlockPartition.build(2, 2))


def test_bhh_reference_values():
    est = bhh_reference(10**6, 2)
    assert est.kind == "reference"
    assert est.applicable
    assert est.meta["beta"] == pytest.approx(math.sqrt(2 / (2 * math.pi * math.e)))
    assert est.value == pytest.approx(est.meta["beta"] * 10**3)
    assert not bhh_reference(100, 1).applicable
    with pytest.raises(ValueError):
        bhh_reference(0, 2)


def test_mu_bounds():
    lo, hi = mu_bounds(6)
    assert lo == pytest.approx(math.sqrt(6) / 3)
    assert hi == pytest.approx(1.0)
    assert lo < hi
    with pytest.raises(ValueError):
        mu_bounds(0)


def test_estimate_validation():
    with pytest.raises(ValueError):
        OracleEstimate(-1.0, "exact", 1, 1)
    with pytest.raises(ValueError):
        OracleEstimate(1.0, "guess", 1, 1)

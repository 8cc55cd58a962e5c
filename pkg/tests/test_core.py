"""Config validation, the phase-count formula, distributions, cost helpers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseplace.core import (
    AlgorithmConfig,
    DistributionSpec,
    PlacementArray,
    compute_ell,
    opt_sort_cost,
    quantile_boundaries,
    tour_cost,
)
from phaseplace.errors import InstanceTooSmall, NonMonotoneQuantile


# ------------------------------------------------------------- compute_ell --

def test_ell_window_frozen_values():
    # n / (4 log2^2 n) < 2^ell <= n / (2 log2^2 n)
    assert compute_ell(2**10) == 2
    assert compute_ell(2**20) == 10
    assert compute_ell(2**16) == 7
    assert compute_ell(2**22) == 12


def test_ell_window_property():
    for n in (2**10, 5000, 2**14, 99_999, 2**20, 2**22):
        ell = compute_ell(n)
        L = math.log2(n) ** 2
        assert n / (4 * L) < 2**ell <= n / (2 * L)


def test_ell_too_small_raises():
    with pytest.raises(InstanceTooSmall):
        compute_ell(16)
    with pytest.raises(InstanceTooSmall):
        compute_ell(64)  # window below 2^1
    assert compute_ell(2**8) == 1  # smallest workable instance at p=2


def test_ell_exponent_scales_window():
    # larger p shrinks the bucket count
    assert compute_ell(2**20, log_exponent=3.0) < compute_ell(2**20, log_exponent=2.0)
    for p in (1.0, 1.5, 2.0, 2.5, 3.0):
        ell = compute_ell(2**20, log_exponent=p)
        L = math.log2(2**20) ** p
        assert 2**20 / (4 * L) < 2**ell <= 2**20 / (2 * L)


# ---------------------------------------------------------------- config ----

def test_config_validation():
    AlgorithmConfig(n=1024)
    with pytest.raises(ValueError):
        AlgorithmConfig(n=1)
    with pytest.raises(ValueError):
        AlgorithmConfig(n=1024, d=0)
    with pytest.raises(ValueError):
        AlgorithmConfig(n=1024, log_exponent=0.5)
    with pytest.raises(ValueError):
        AlgorithmConfig(n=1024, backyard_constant=0.0)
    with pytest.raises(ValueError):
        AlgorithmConfig(n=1024, seed=-1)


# ---------------------------------------------------------- distributions ---

def test_uniform_transform_is_identity():
    dist = DistributionSpec.uniform()
    u = np.linspace(0, 1, 11)
    assert np.array_equal(dist.transform(u), u)


def test_quantile_transform():
    dist = DistributionSpec.from_quantile(np.sqrt, name="sqrt")
    u = np.array([0.0, 0.25, 1.0])
    assert np.allclose(dist.transform(u), [0.0, 0.5, 1.0])


def test_quantile_must_be_monotone():
    with pytest.raises(NonMonotoneQuantile):
        DistributionSpec.from_quantile(lambda u: 1.0 - u, name="decreasing")


def test_quantile_must_hit_unit_interval():
    with pytest.raises(NonMonotoneQuantile):
        DistributionSpec.from_quantile(lambda u: u * 2.0, name="overflowing")


def test_table_distribution_interpolates():
    dist = DistributionSpec.from_samples([0.0, 0.5, 1.0], [0.0, 0.25, 1.0])
    assert np.allclose(dist.transform(np.array([0.25])), [0.125])
    assert np.allclose(dist.transform(np.array([0.75])), [0.625])


def test_quantile_boundaries_equal_mass():
    dist = DistributionSpec.from_quantile(np.sqrt, name="sqrt")
    b = quantile_boundaries(dist, 32)
    assert b[0] == 0.0 and b[-1] == 1.0
    mass = b[1:] ** 2 - b[:-1] ** 2  # F(x) = x^2
    assert np.allclose(mass, 1 / 32, atol=1e-9)
    assert np.all(np.diff(b) > 0)


def test_quantile_boundaries_uniform():
    b = quantile_boundaries(DistributionSpec.uniform(), 8)
    assert np.allclose(b, np.arange(9) / 8)


# ------------------------------------------------------------- placement ----

def test_placement_array_write_once():
    arr = PlacementArray(4)
    arr.write(0, 0.5)
    with pytest.raises(Exception):
        arr.write(0, 0.7)
    arr.write(3, 0.1)
    assert arr.filled_count == 2
    assert not arr.complete
    assert arr.point(0) == 0.5


def test_placement_array_multidim():
    arr = PlacementArray(3, d=2)
    arr.write(1, (0.2, 0.8))
    assert arr.point(1) == (0.2, 0.8)
    assert arr.is_filled(1) and not arr.is_filled(0)


def test_from_points_roundtrip():
    arr = PlacementArray.from_points([0.3, 0.1, 0.9])
    assert arr.complete
    assert tour_cost(arr) == pytest.approx(abs(0.3 - 0.1) + abs(0.1 - 0.9))


# ------------------------------------------------------------ cost helpers --

def test_opt_sort_cost_is_span():
    assert opt_sort_cost([0.4, 0.9, 0.1, 0.5]) == pytest.approx(0.8)
    assert opt_sort_cost([0.7]) == 0.0


def test_tour_cost_euclidean():
    arr = PlacementArray.from_points([(0.0, 0.0), (3.0 / 5, 4.0 / 5)], d=2)
    assert tour_cost(arr) == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=40))
def test_sorted_placement_reaches_opt(vals):
    arr = PlacementArray.from_points(sorted(vals))
    assert tour_cost(arr) == pytest.approx(opt_sort_cost(vals), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=40))
def test_any_order_at_least_opt(vals):
    arr = PlacementArray.from_points(vals)
    assert tour_cost(arr) >= opt_sort_cost(vals) - 1e-12

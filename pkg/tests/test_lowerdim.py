import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import LOG2_LOG3, cantor_endpoints, random_measure
from fractals.errors import InsufficientDataError, InvalidInputError
from fractals.geometry import PointSet, ScaleGrid
from fractals.ifs import cantor_system, discretize_depth
from fractals.lowerdim import estimate_lower_dim_measure, estimate_lower_dim_set, select_centers
from fractals.measure import DiscreteMeasure, convolve, scale_measure, translate

TRIADIC_GRID = ScaleGrid(3 ** -9, 3 ** -2, 8)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestLowerDimSet:
    def test_isolated_points(self):
        estimate = estimate_lower_dim_set(PointSet([[0.0], [1.0]]), ScaleGrid(0.01, 0.5, 4))
        assert estimate.value <= 0.05

    def test_uniform_grid(self):
        E = PointSet(np.arange(1024) / 1023)
        assert estimate_lower_dim_set(E, ScaleGrid(2 ** -8, 2 ** -1, 8)).value == pytest.approx(1.0, abs=0.1)

    @pytest.mark.slow
    def test_cantor_endpoints(self):
        estimate = estimate_lower_dim_set(PointSet(cantor_endpoints(10)), TRIADIC_GRID)
        assert estimate.value == pytest.approx(LOG2_LOG3, abs=0.1)

    def test_depth_trend_approaches_the_limit(self):
        values = [estimate_lower_dim_set(PointSet(cantor_endpoints(k)), TRIADIC_GRID).value for k in (6, 8, 10)]
        assert values[0] <= values[1] <= values[2]
        assert values[2] == pytest.approx(LOG2_LOG3, abs=0.1)

    def test_witnesses(self):
        estimate = estimate_lower_dim_set(PointSet(cantor_endpoints(6)), ScaleGrid(3 ** -6, 3 ** -1, 6))
        assert estimate.value == min(w.exponent for w in estimate.witnesses)
        assert estimate.argmin().exponent == estimate.value
        assert all(w.R / w.r >= 8 * (1 - 1e-9) for w in estimate.witnesses)
        assert len(estimate.witness_records()[0]) == 4

    def test_planar_square(self):
        side = np.arange(24) / 23
        E = PointSet(np.array(np.meshgrid(side, side)).reshape(2, -1).T)
        assert estimate_lower_dim_set(E, ScaleGrid(1 / 16, 1.0, 5, ratio_floor=4), center_cap=16).value >= 1.2

    def test_no_admissible_pair(self):
        with pytest.raises(InsufficientDataError):
            estimate_lower_dim_set(PointSet([[0.0], [1.0]]), ScaleGrid(0.2, 0.5, 3))

    def test_grid_validation(self):
        with pytest.raises(InvalidInputError):
            ScaleGrid(0.5, 0.2)


class TestLowerDimMeasure:
    def test_dirac_combination(self):
        mu = DiscreteMeasure([[0.0], [1.0], [3.0]], [0.2, 0.3, 0.5])
        assert estimate_lower_dim_measure(mu, ScaleGrid(0.01, 0.9, 5)).value <= 0.05

    @pytest.mark.slow
    def test_example_two(self, example_two):
        mu = discretize_depth(example_two, 10).measure
        assert estimate_lower_dim_measure(mu, TRIADIC_GRID).value == pytest.approx(0.3691, abs=0.1)

    @pytest.mark.slow
    def test_equal_weights(self, triadic):
        mu = discretize_depth(triadic, 10).measure
        assert estimate_lower_dim_measure(mu, TRIADIC_GRID).value == pytest.approx(LOG2_LOG3, abs=0.1)

    def test_requires_probability(self):
        with pytest.raises(InvalidInputError):
            estimate_lower_dim_measure(DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0]), ScaleGrid(0.01, 0.5, 4))

    def test_min_atoms_skips_sparse_balls(self):
        mu = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
        with pytest.raises(InsufficientDataError):
            estimate_lower_dim_measure(mu, ScaleGrid(0.01, 0.5, 4, min_atoms=2))

    @given(seeds, st.floats(min_value=-5, max_value=5))
    @settings(max_examples=30, deadline=None)
    def test_translation_equivariance(self, seed, x):
        mu = random_measure(np.random.default_rng(seed), min_atoms=2)
        grid = ScaleGrid(0.05, 1.0, 5, ratio_floor=4)
        try:
            before = estimate_lower_dim_measure(mu, grid).value
        except InsufficientDataError:
            return
        assert estimate_lower_dim_measure(translate(mu, [x]), grid).value == pytest.approx(before, abs=1e-9)

    @given(seeds, st.floats(min_value=0.1, max_value=10))
    @settings(max_examples=30, deadline=None)
    def test_scaling_covariance(self, seed, beta):
        mu = random_measure(np.random.default_rng(seed), min_atoms=2)
        grid = ScaleGrid(0.05, 1.0, 5, ratio_floor=4)
        try:
            before = estimate_lower_dim_measure(mu, grid)
        except InsufficientDataError:
            return
        after = estimate_lower_dim_measure(scale_measure(mu, beta), grid.scaled(1 / beta))
        assert after.value == pytest.approx(before.value, abs=1e-9)

    def test_separated_dirac_convolution(self):
        mu = discretize_depth(cantor_system(1 / 3), 6).measure
        omega = DiscreteMeasure([[0.0], [10.0]], [0.5, 0.5])
        grid = ScaleGrid(3 ** -6, 3 ** -2, 5)
        before = estimate_lower_dim_measure(mu, grid).value
        after = estimate_lower_dim_measure(convolve(mu, omega), grid).value
        assert after == pytest.approx(before, abs=1e-9)


class TestCenters:
    def test_stride_is_deterministic(self):
        points = np.arange(1000, dtype=float).reshape(-1, 1)[::-1]
        centers = select_centers(points, 100)
        assert len(centers) == 100
        assert centers[:3, 0].tolist() == [0.0, 10.0, 20.0]

    def test_small_sets_keep_every_point(self):
        assert len(select_centers(np.zeros((5, 1)), 10)) == 5

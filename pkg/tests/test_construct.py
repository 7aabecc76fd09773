import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import LOG2_LOG3, random_measure
from fractals.construct import (
    CANTOR_BLOCK,
    EMPTY_BLOCK,
    INTERVAL_BLOCK,
    approximate_measure_lower_dim,
    approximate_measure_quant_dim,
    approximate_set_equal_dims,
    approximate_set_lower_dim,
    approximate_set_split_dims,
    epsilon_net,
    push_to_net,
)
from fractals.errors import BudgetError, InvalidInputError, UnsupportedModeError
from fractals.geometry import PointSet, ScaleGrid, hausdorff_distance
from fractals.lowerdim import estimate_lower_dim_measure, estimate_lower_dim_set
from fractals.measure import DiscreteMeasure, kantorovich_distance
from fractals.quantization import error_curve, estimate_quant_dim
from fractals.symbolic import (
    DIRAC_CONVOLUTION_LOWER,
    DIRAC_CONVOLUTION_QUANT,
    GRAF_LUSCHGY,
    SCALING,
    SELF_SIMILAR_LOWER,
    Convolve,
    DiracCombo,
)

point_lists = st.lists(st.floats(min_value=-3, max_value=3, allow_nan=False), min_size=1, max_size=30)


class TestEpsilonNet:
    def test_single_point(self):
        assert epsilon_net(PointSet([[2.0]]), 0.1).points.tolist() == [[2.0]]

    def test_example(self):
        assert epsilon_net(PointSet([[0.0], [0.3], [1.0]]), 0.5).points[:, 0].tolist() == [0.0, 1.0]

    @given(point_lists, st.floats(min_value=0.01, max_value=2))
    @settings(max_examples=100)
    def test_covers_and_separates(self, values, epsilon):
        A = PointSet(values)
        net = epsilon_net(A, epsilon)
        assert hausdorff_distance(A, net) < epsilon
        for a, b in itertools.combinations(net.points[:, 0], 2):
            assert abs(a - b) >= epsilon

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(InvalidInputError):
            epsilon_net(PointSet([[0.0]]), 0.0)


class TestSetApproximation:
    def test_dimension_zero_keeps_the_anchors(self):
        A = PointSet([[0.0], [0.05], [1.0]])
        result = approximate_set_lower_dim(A, 0.2, 0.0)
        assert result.block.kind == EMPTY_BLOCK
        assert result.realized.as_set() == result.anchors.as_set()
        assert result.certified_lower_dim == 0.0

    def test_cantor_blocks(self):
        result = approximate_set_lower_dim(PointSet([[0.0]]), 4.0, LOG2_LOG3)
        assert result.block.kind == CANTOR_BLOCK
        assert result.block.ratio == pytest.approx(1 / 3)
        assert result.certified_lower_dim == pytest.approx(LOG2_LOG3, abs=1e-12)
        assert result.realized.points.max() <= 1.0

    @pytest.mark.slow
    def test_cantor_block_estimate(self):
        result = approximate_set_lower_dim(PointSet([[0.0]]), 4.0, LOG2_LOG3, depth=10)
        estimate = estimate_lower_dim_set(result.realized, ScaleGrid(3 ** -9, 3 ** -2, 8))
        assert estimate.value == pytest.approx(LOG2_LOG3, abs=0.1)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_inputs(self, seed):
        rng = np.random.default_rng(seed)
        A = PointSet(rng.uniform(0, 10, int(rng.integers(1, 40))))
        epsilon = float(rng.choice([0.05, 0.5, 2.0]))
        gamma = float(rng.choice([0.0, 0.25, 0.5, LOG2_LOG3, 1.0]))
        result = approximate_set_lower_dim(A, epsilon, gamma, depth=6)
        assert result.hausdorff_check < epsilon
        assert result.certified_lower_dim == pytest.approx(gamma, abs=1e-12)

    def test_blocks_are_separated(self):
        A = PointSet(np.linspace(0, 3, 31))
        result = approximate_set_lower_dim(A, 0.25, 0.5, depth=4)
        anchors = result.anchors.points[:, 0]
        width = result.block.width
        assert width == pytest.approx(0.0625)
        assert np.all(np.diff(anchors) - width >= 0.75 * 0.25 - 1e-12)

    def test_equal_dims(self):
        result = approximate_set_equal_dims(PointSet([[0.0], [2.0]]), 0.5, 0.5)
        assert result.block.ratio == pytest.approx(0.25)
        assert result.certified_lower_dim == pytest.approx(0.5, abs=1e-12)
        assert result.certified_hausdorff_dim == result.certified_lower_dim

    @given(st.floats(min_value=0.05, max_value=0.95))
    @settings(max_examples=50, deadline=None)
    def test_equal_dims_for_any_target(self, gamma):
        result = approximate_set_equal_dims(PointSet([[0.0], [2.0]]), 0.5, gamma, depth=3)
        assert result.certified_lower_dim == pytest.approx(gamma, abs=1e-12)
        assert result.certified_hausdorff_dim == result.certified_lower_dim

    def test_full_dimension_uses_intervals(self):
        result = approximate_set_equal_dims(PointSet([[0.0]]), 1.0, 1.0, depth=3)
        assert result.block.kind == INTERVAL_BLOCK
        assert result.realized.points[:, 0] == pytest.approx(np.arange(9) / 32)

    def test_split_dims(self):
        result = approximate_set_split_dims(PointSet([[0.0], [5.0]]), 0.5, depth=6)
        points = result.realized.points[:, 0]
        assert points.min() == pytest.approx(-0.25)
        assert points[points < 1].max() == pytest.approx(0.25)
        assert 5.0 in points
        assert (result.certified_lower_dim, result.certified_hausdorff_dim) == (0.0, 1.0)
        assert result.hausdorff_check < 0.5

    def test_split_dims_estimate_sees_the_isolated_point(self):
        result = approximate_set_split_dims(PointSet([[0.0], [5.0]]), 0.5, depth=6)
        assert estimate_lower_dim_set(result.realized, ScaleGrid(0.01, 1.0, 4)).value <= 0.05

    def test_split_dims_single_anchor(self):
        result = approximate_set_split_dims(PointSet([[0.0], [0.1]]), 0.5, depth=4)
        assert result.anchors.points[:, 0].tolist() == [0.0, 0.375]
        assert result.hausdorff_check < 0.5

    def test_rejects_planar_input(self):
        with pytest.raises(UnsupportedModeError):
            approximate_set_lower_dim(PointSet([[0.0, 0.0]]), 0.5, 0.5)

    @pytest.mark.parametrize("gamma", [-0.1, 1.5])
    def test_rejects_target_out_of_range(self, gamma):
        with pytest.raises(InvalidInputError):
            approximate_set_lower_dim(PointSet([[0.0]]), 0.5, gamma)


class TestPushToNet:
    def test_cost_is_bounded(self):
        theta = random_measure(np.random.default_rng(0), min_atoms=8)
        anchored, cost = push_to_net(theta, 1.0)
        assert anchored.normalized
        assert cost < 0.5
        assert kantorovich_distance(theta, anchored) <= cost + 1e-12


class TestMeasureApproximation:
    def test_dimension_zero(self, two_atoms):
        result = approximate_measure_lower_dim(two_atoms, 0.1, 0.0)
        assert isinstance(result.symbolic, DiracCombo)
        assert result.certified.lower_dim == 0.0
        assert result.kantorovich_check == pytest.approx(0.0)

    def test_lower_dim_certificate(self, two_atoms):
        result = approximate_measure_lower_dim(two_atoms, 0.1, LOG2_LOG3, depth=8)
        assert isinstance(result.symbolic, Convolve)
        assert result.certified.lower_dim == pytest.approx(LOG2_LOG3, abs=1e-12)
        assert result.certified.lower_certificate == (SELF_SIMILAR_LOWER, SCALING, DIRAC_CONVOLUTION_LOWER)
        assert result.epsilon_budget.total < 0.1
        assert result.kantorovich_check < 0.1
        assert result.realized.points.max() <= 1.0 + 0.05 + 1e-12

    @pytest.mark.slow
    def test_lower_dim_estimate(self):
        epsilon = 0.2
        result = approximate_measure_lower_dim(DiscreteMeasure.dirac([0.0]), epsilon, LOG2_LOG3, depth=10)
        grid = ScaleGrid(3 ** -9, 3 ** -2, 8).scaled(epsilon / 2)
        assert estimate_lower_dim_measure(result.realized, grid).value == pytest.approx(LOG2_LOG3, abs=0.1)

    def test_quant_dim_certificate(self, two_atoms):
        result = approximate_measure_quant_dim(two_atoms, 0.1, LOG2_LOG3, r=2.0, depth=8)
        assert result.certified.quant_dim == pytest.approx(LOG2_LOG3, abs=1e-10)
        assert result.certified.quant_certificate == (GRAF_LUSCHGY, SCALING, DIRAC_CONVOLUTION_QUANT)
        assert result.kantorovich_check < 0.1

    @pytest.mark.slow
    def test_quant_dim_estimate(self):
        result = approximate_measure_quant_dim(DiscreteMeasure.dirac([0.0]), 0.2, LOG2_LOG3, depth=10)
        assert estimate_quant_dim(error_curve(result.realized, 32, 2)).value == pytest.approx(LOG2_LOG3, abs=0.1)

    def test_full_dimension_uses_the_uniform_model(self, two_atoms):
        result = approximate_measure_quant_dim(two_atoms, 0.1, 1.0, depth=6)
        assert result.certified.quant_dim == 1.0
        assert result.notes["model"] == {"op": "uniform", "dim": 1}

    @pytest.mark.parametrize("seed", range(20))
    def test_random_inputs(self, seed):
        rng = np.random.default_rng(seed)
        theta = random_measure(rng, low=0.0, high=1.0)
        epsilon = float(rng.choice([0.05, 0.2]))
        beta = float(rng.choice([0.0, 0.5, LOG2_LOG3, 1.0]))
        result = approximate_measure_lower_dim(theta, epsilon, beta, depth=8)
        assert result.kantorovich_check < epsilon
        assert result.epsilon_budget.total < epsilon
        assert result.certified.lower_dim == pytest.approx(beta, abs=1e-12)

    def test_planar_input(self):
        theta = DiscreteMeasure([[0.0, 0.0], [1.0, 1.0]], [0.5, 0.5])
        result = approximate_measure_lower_dim(theta, 0.2, 1.0, depth=3)
        assert result.certified.lower_dim == pytest.approx(1.0, abs=1e-12)
        assert result.kantorovich_check < 0.2

    def test_spatial_input(self):
        theta = DiscreteMeasure.dirac([0.0, 0.0, 0.0])
        lower = approximate_measure_lower_dim(theta, 0.5, 1.5, depth=2)
        assert lower.certified.lower_dim == pytest.approx(1.5, abs=1e-12)
        assert len(lower.realized) == 64
        assert lower.kantorovich_check < 0.5
        quant = approximate_measure_quant_dim(theta, 0.5, 1.5, r=2.0, depth=2)
        assert quant.certified.quant_dim == pytest.approx(1.5, abs=1e-10)

    def test_depth_above_the_cap_is_a_budget_failure(self, two_atoms):
        with pytest.raises(BudgetError) as info:
            approximate_measure_lower_dim(two_atoms, 0.1, 0.5, depth=21)
        assert info.value.exit_code == 6

    @pytest.mark.parametrize("beta", [-0.5, 1.5])
    def test_rejects_target_out_of_range(self, two_atoms, beta):
        with pytest.raises(InvalidInputError):
            approximate_measure_lower_dim(two_atoms, 0.1, beta)

    def test_rejects_unnormalized_input(self):
        with pytest.raises(InvalidInputError):
            approximate_measure_lower_dim(DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0]), 0.1, 0.5)

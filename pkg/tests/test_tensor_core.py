"""
Unit tests for fan power tensors, CP models and multilinear kernels
"""

import numpy as np
import pytest

from services.errors import (
    ColumnMismatchError, DimensionMismatchError, IndexOutOfBoundsError, InvalidModeError,
    InvalidConfigError, LengthMismatchError, MaskDegenerateError, NonFiniteValueError,
)
from services.tensor import (
    CpModel, FanPowerTensor, ObservationMask, cp_eval, cp_full, khatri_rao, mode_fold, mode_unfold,
    tensor_from_values,
)


def random_model(rng, dims, rank):
    return CpModel(*(rng.standard_normal((d, rank)) for d in dims))


class TestTensorFromValues:
    """Test cases for building tensors from flat values"""

    def test_direct_storage(self):
        """Test that read access returns the stored value"""
        tensor = tensor_from_values((2, 1, 1), 30, [3.0, 4.0])

        assert tensor.dims == (2, 1, 1)
        assert tensor.slot_minutes == 30
        assert tensor.value_at(1, 0, 0) == 4.0

    def test_row_major_layout(self):
        """Test the (time, fan, day) row-major layout"""
        tensor = tensor_from_values((2, 2, 2), 15, list(range(8)))

        assert tensor.value_at(0, 0, 1) == 1.0
        assert tensor.value_at(0, 1, 0) == 2.0
        assert tensor.value_at(1, 0, 0) == 4.0

    def test_length_mismatch(self):
        """Test that a wrong number of values is rejected"""
        with pytest.raises(LengthMismatchError):
            tensor_from_values((2, 2, 2), 15, [1.0] * 7)

    def test_non_finite_value_reports_index(self):
        """Test that the first non-finite flat index is reported"""
        with pytest.raises(NonFiniteValueError) as excinfo:
            tensor_from_values((1, 1, 1), 15, [float('nan')])
        assert excinfo.value.index == 0

        with pytest.raises(NonFiniteValueError) as excinfo:
            tensor_from_values((2, 1, 2), 15, [1.0, 2.0, float('inf'), float('nan')])
        assert excinfo.value.index == 2

    def test_day_must_fit_calendar_day(self):
        """Test that slot_minutes * T may not exceed one day"""
        tensor_from_values((48, 1, 1), 30, [1.0] * 48)

        with pytest.raises(InvalidConfigError, match="exceed one day"):
            tensor_from_values((49, 1, 1), 30, [1.0] * 49)

    def test_invalid_slot_minutes(self):
        """Test that a non-positive resolution is reported as a configuration error"""
        with pytest.raises(InvalidConfigError, match="slot_minutes"):
            tensor_from_values((2, 1, 1), 0, [1.0, 2.0])

    def test_tensor_is_read_only(self):
        """Test that stored values cannot be modified"""
        tensor = tensor_from_values((2, 1, 1), 30, [3.0, 4.0])

        with pytest.raises(ValueError):
            tensor.values[0, 0, 0] = 1.0

    def test_index_out_of_bounds(self):
        """Test out-of-range reads"""
        tensor = tensor_from_values((2, 1, 1), 30, [3.0, 4.0])

        with pytest.raises(IndexOutOfBoundsError):
            tensor.value_at(2, 0, 0)


class TestCpModel:
    """Test cases for CP model evaluation"""

    def setup_method(self):
        """Set up the hand-evaluated rank-1 model"""
        self.model = CpModel.from_vectors([[1.0, 2.0]], [[3.0]], [[4.0, 5.0]])

    def test_ones_model(self):
        """Test that an all-ones rank-1 model evaluates to one everywhere"""
        model = CpModel(np.ones((3, 1)), np.ones((2, 1)), np.ones((4, 1)))

        assert cp_eval(model, (2, 1, 3)) == 1.0
        np.testing.assert_array_equal(cp_full(model, 15).values, np.ones((3, 2, 4)))

    def test_hand_evaluation(self):
        """Test l=[1,2], w=[3], wbar=[4,5] at the last time slot and day"""
        assert cp_eval(self.model, (1, 0, 1)) == 30.0

    def test_full_reconstruction(self):
        """Test the dense reconstruction of the hand model"""
        full = cp_full(self.model, 30)

        expected = np.array([[[12.0, 15.0]], [[24.0, 30.0]]])
        np.testing.assert_array_equal(full.values, expected)

    def test_duplicated_components_double_the_value(self):
        """Test linearity of the component sum"""
        rng = np.random.default_rng(3)
        single = random_model(rng, (3, 2, 4), 1)
        doubled = CpModel(*(np.hstack([f, f]) for f in single.factors))

        for index in [(0, 0, 0), (2, 1, 3), (1, 0, 2)]:
            assert cp_eval(doubled, index) == 2 * cp_eval(single, index)

    def test_full_and_eval_agree_bitwise(self):
        """Test that cp_full and cp_eval agree exactly on random models"""
        rng = np.random.default_rng(11)
        for _ in range(100):
            model = random_model(rng, (3, 2, 4), 3)
            full = cp_full(model, 15)
            for index in [(0, 0, 0), (2, 1, 3), (1, 1, 2)]:
                assert full.value_at(*index) == cp_eval(model, index)

    def test_unfolding_rank_bounded_by_model_rank(self):
        """Test that mode-1 unfoldings of rank-r reconstructions have rank <= r"""
        rng = np.random.default_rng(5)
        for rank in (1, 2, 3):
            full = cp_full(random_model(rng, (8, 6, 7), rank), 15)
            singular = np.linalg.svd(mode_unfold(full, 1), compute_uv=False)
            assert np.sum(singular > 1e-8 * singular[0]) <= rank

    def test_flat_round_trip(self):
        """Test packing factors into a flat vector and back"""
        rng = np.random.default_rng(2)
        model = random_model(rng, (3, 2, 4), 2)

        restored = CpModel.from_flat(model.to_flat(), model.dims, model.rank)

        for original, unpacked in zip(model.factors, restored.factors):
            np.testing.assert_array_equal(original, unpacked)

    def test_invalid_models(self):
        """Test rank disagreement and non-finite factors"""
        with pytest.raises(DimensionMismatchError):
            CpModel(np.ones((2, 2)), np.ones((2, 1)), np.ones((2, 2)))

        with pytest.raises(NonFiniteValueError):
            CpModel(np.array([[np.nan]]), np.ones((1, 1)), np.ones((1, 1)))

    def test_eval_out_of_bounds(self):
        """Test that evaluation outside the model dims is rejected"""
        with pytest.raises(IndexOutOfBoundsError):
            cp_eval(self.model, (2, 0, 0))


class TestModeUnfold:
    """Test cases for unfolding and folding"""

    def setup_method(self):
        """Set up p_ijk = 100i + 10j + k with 1-based labels"""
        values = np.zeros((2, 2, 2))
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    values[i, j, k] = 100 * (i + 1) + 10 * (j + 1) + (k + 1)
        self.tensor = FanPowerTensor(values, 15)

    def test_single_entry(self):
        """Test unfolding a 1x1x1 tensor in every mode"""
        tensor = tensor_from_values((1, 1, 1), 15, [7.0])

        for mode in (1, 2, 3):
            np.testing.assert_array_equal(mode_unfold(tensor, mode), [[7.0]])

    def test_mode_one_column_order(self):
        """Test the Kolda-Bader column ordering of the mode-1 unfolding"""
        unfolded = mode_unfold(self.tensor, 1)

        assert unfolded.shape == (2, 4)
        np.testing.assert_array_equal(unfolded[0], [111, 121, 112, 122])

    def test_mode_two_and_three_shapes(self):
        """Test the shapes and first rows of modes 2 and 3"""
        np.testing.assert_array_equal(mode_unfold(self.tensor, 2)[0], [111, 211, 112, 212])
        np.testing.assert_array_equal(mode_unfold(self.tensor, 3)[0], [111, 211, 121, 221])

    def test_fold_inverts_unfold(self):
        """Test exact round trips on random tensors"""
        rng = np.random.default_rng(0)
        for _ in range(5):
            values = rng.standard_normal((3, 4, 5))
            for mode in (1, 2, 3):
                refolded = mode_fold(mode_unfold(values, mode), mode, values.shape)
                np.testing.assert_array_equal(refolded, values)

    def test_invalid_mode(self):
        """Test that modes other than 1, 2, 3 are rejected"""
        with pytest.raises(InvalidModeError):
            mode_unfold(self.tensor, 0)
        with pytest.raises(InvalidModeError):
            mode_unfold(self.tensor, 4)

    def test_unfolding_matches_khatri_rao_identity(self):
        """Test unfold(X, n) = factor @ khatri_rao(others).T for X = [[A, B, C]]"""
        rng = np.random.default_rng(8)
        model = random_model(rng, (3, 4, 5), 2)
        A, B, C = model.factors
        full = cp_full(model, 15)

        np.testing.assert_allclose(mode_unfold(full, 1), A @ khatri_rao(C, B).T, atol=1e-12)
        np.testing.assert_allclose(mode_unfold(full, 2), B @ khatri_rao(C, A).T, atol=1e-12)
        np.testing.assert_allclose(mode_unfold(full, 3), C @ khatri_rao(B, A).T, atol=1e-12)


class TestKhatriRao:
    """Test cases for the column-wise Kronecker product"""

    def test_ones(self):
        """Test the all-ones case"""
        np.testing.assert_array_equal(khatri_rao([[1], [1]], [[1], [1]]), np.ones((4, 1)))

    def test_hand_example(self):
        """Test a hand-computed 2x2 example"""
        result = khatri_rao([[1, 2], [3, 4]], [[5, 6], [7, 8]])

        np.testing.assert_array_equal(result[:, 0], [5, 7, 15, 21])
        np.testing.assert_array_equal(result[:, 1], [12, 16, 24, 32])

    def test_row_index_map(self):
        """Test row a*n + b equals A[a] * B[b]"""
        rng = np.random.default_rng(4)
        A = rng.standard_normal((3, 2))
        B = rng.standard_normal((4, 2))
        result = khatri_rao(A, B)

        for a in range(3):
            for b in range(4):
                np.testing.assert_array_equal(result[a * 4 + b], A[a] * B[b])

    def test_column_mismatch(self):
        """Test that unequal column counts are rejected"""
        with pytest.raises(ColumnMismatchError):
            khatri_rao(np.ones((2, 2)), np.ones((3, 3)))


class TestObservationMask:
    """Test cases for observation masks"""

    def test_counts(self):
        """Test observed and unobserved counts"""
        observed = np.ones((3, 2, 2), dtype=bool)
        observed[0, :, 1] = False
        mask = ObservationMask(observed)

        assert mask.observed_count == 10
        assert mask.unobserved_count == 2

    def test_mode_coverage(self):
        """Test that a fully unobserved mode slice is rejected"""
        observed = np.ones((3, 2, 2), dtype=bool)
        observed[:, 1, :] = False

        with pytest.raises(MaskDegenerateError, match="fan index 1"):
            ObservationMask(observed).check_mode_coverage()

    def test_dims_must_match(self):
        """Test that a mask must match its tensor"""
        tensor = tensor_from_values((2, 1, 1), 30, [3.0, 4.0])

        with pytest.raises(DimensionMismatchError):
            ObservationMask.all_observed((1, 1, 1)).check_matches(tensor)

import numpy as np
import pytest

from src.artmap import activation, activations, candidate_subset, complement_code, match_ratio, overlap
from src.utils.errors import DimensionError, InputDomainError

A = np.array([0.2, 0.7, 0.8, 0.3])
W = np.array([0.1, 0.5, 0.6, 0.3])


class TestComplementCode:
    def test_appends_complement(self):
        assert complement_code([0.2, 0.7]) == pytest.approx([0.2, 0.7, 0.8, 0.3])

    def test_zero_vector(self):
        assert list(complement_code([0.0, 0.0])) == [0.0, 0.0, 1.0, 1.0]

    def test_norm_is_half_length(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a = rng.random(int(rng.integers(1, 40)))
            assert complement_code(a).sum() == pytest.approx(len(a), abs=1e-9)

    def test_out_of_range_rejected(self):
        with pytest.raises(InputDomainError):
            complement_code([0.2, 1.2])
        with pytest.raises(InputDomainError):
            complement_code([np.nan, 0.5])

    def test_wrong_length_rejected(self):
        with pytest.raises(DimensionError):
            complement_code([0.2, 0.3, 0.4], raw_dimension=2)


class TestActivation:
    def test_formula(self):
        assert activation(A, W, 0.01, 4) == pytest.approx(3.975)

    def test_uncommitted_node_scores_half_length(self):
        assert activation(A, np.ones(4), 0.01) == pytest.approx(2.0)

    def test_self_activation(self):
        assert activation(A, A, 0.01) == pytest.approx(3.98)

    def test_vectorized_matches_scalar(self):
        stacked = np.vstack((W, A, np.ones(4)))
        expected = [activation(A, w, 0.01) for w in stacked]
        assert activations(A, stacked, 0.01) == pytest.approx(expected)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            activation(A, np.ones(6), 0.01)


class TestCandidateSubset:
    def test_threshold_is_alpha_m(self):
        assert candidate_subset(np.array([3.975, 0.02]), 0.01, 4) == {0}

    def test_all_below_threshold(self):
        assert candidate_subset(np.array([0.01, 0.04]), 0.01, 4) == set()

    def test_no_nodes(self):
        assert candidate_subset(np.zeros(0), 0.01, 4) == set()

    def test_eligibility_mask(self):
        T = np.array([3.0, 2.0, 1.0])
        assert candidate_subset(T, 0.01, 4, np.array([True, False, True])) == {0, 2}


class TestMatchAndOverlap:
    def test_match_ratio(self):
        assert match_ratio(A, W) == pytest.approx(0.75)
        assert match_ratio(A, A) == pytest.approx(1.0)
        assert match_ratio(A, np.ones(4)) == pytest.approx(1.0)

    def test_overlap_is_containment_normalized(self):
        # |A ∧ w| = 1.5 = |w|
        assert overlap(A, W) == pytest.approx(1.0)
        assert overlap(A, A) == pytest.approx(1.0)

    def test_overlap_partial(self):
        w = np.array([0.0, 0.0, 1.0, 1.0])
        assert overlap(A, w) == pytest.approx(1.1 / 2.0)

    def test_overlap_zero_weights(self):
        assert overlap(A, np.zeros(4)) == 0.0

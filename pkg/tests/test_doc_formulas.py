import math

import pytest

from personaforge import (
    ParameterError,
    beta_for_set_size,
    discrimination_set_size,
    inner_trial_count,
    min_cluster_size,
    quality,
)


class TestDiscriminationSetSize:
    @pytest.mark.parametrize("beta,expected", [(0.25, 2), (0.45, 3), (0.65, 4), (0.85, 5)])
    def test_study_settings(self, beta, expected):
        assert discrimination_set_size(47, beta) == expected

    def test_clamped_to_one(self):
        assert discrimination_set_size(1, 0.25) == 1

    def test_direct_evaluation(self):
        # floor(ln 94 / ln 4) = floor(3.277...) = 3
        assert discrimination_set_size(47, 0.5) == 3

    def test_inverts_beta_formula(self):
        for r in range(1, 7):   # beta exceeds 1 from r = 7 on (47 dims)
            beta = beta_for_set_size(47, r)
            assert math.isclose(beta, 2 * math.exp(-math.log(94) / r))
            # nudging beta up keeps r; nudging it down drops to r - 1
            assert discrimination_set_size(47, min(beta * 1.0001, 0.9999)) == r
            if r > 1:
                assert discrimination_set_size(47, beta * 0.9999) == r - 1

    def test_rejects_bad_input(self):
        with pytest.raises(ParameterError):
            discrimination_set_size(0, 0.45)
        with pytest.raises(ParameterError):
            discrimination_set_size(47, 1.0)


class TestInnerTrialCount:
    def test_hand_computed(self):
        assert inner_trial_count(0.1, 2) == 555          # ceil(400 * ln 4)
        assert inner_trial_count(1.0, 1) == 3            # ceil(2 * ln 4)
        assert inner_trial_count(0.1, 5) == 4_436_142    # ceil(20^5 * ln 4)

    def test_cap(self):
        with pytest.raises(ParameterError, match="cap"):
            inner_trial_count(0.1, 5, cap=1_000_000)
        assert inner_trial_count(0.1, 5, cap=5_000_000) == 4_436_142

    def test_rejects_bad_input(self):
        with pytest.raises(ParameterError):
            inner_trial_count(0.0, 2)
        with pytest.raises(ParameterError):
            inner_trial_count(0.1, 0)


class TestQuality:
    def test_trivial_values(self):
        assert quality(2, 3, 0.25) == 128.0   # 2 * 4^3
        assert quality(0, 7, 0.45) == 0.0

    def test_monotone_in_subspace(self):
        assert quality(3, 24, 0.45) > quality(3, 10, 0.45)

    def test_monotone_in_members(self):
        assert quality(4, 10, 0.45) > quality(3, 10, 0.45)


class TestMinClusterSize:
    def test_study_setting(self):
        # alpha = 0.1 on 20 subjects accepts pairs
        assert min_cluster_size(0.1, 20) == 2

    def test_float_dust_does_not_raise_threshold(self):
        assert min_cluster_size(0.3, 10) == 3
        assert min_cluster_size(0.2, 5) == 1
        assert min_cluster_size(1.0, 7) == 7

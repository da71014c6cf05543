from itertools import permutations

import numpy as np
import pytest

from lingamsort import (
    DataMatrix,
    RankDeficient,
    ResidualState,
    ZeroVarianceColumn,
    apply_moments,
    column_moments,
    ols_residual,
    partial_update,
    standardize,
)


class TestStandardize:
    def test_two_point_column(self):
        # mean 2, sd (denominator n) = 1, so (1, 3) -> (-1, 1)
        x = standardize(DataMatrix(np.array([[1.0], [3.0]])))
        assert np.array_equal(x.values, np.array([[-1.0], [1.0]]))
        assert x.standardized

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = standardize(DataMatrix(rng.standard_normal((50, 4))))
        again = standardize(x)
        assert np.max(np.abs(again.values - x.values)) <= 1e-12

    def test_constant_column_raises(self):
        with pytest.raises(ZeroVarianceColumn) as err:
            standardize(DataMatrix(np.array([[1.0, 2.0], [1.5, 2.0]])))
        assert err.value.column == 1

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            standardize(DataMatrix(np.array([[1.0, 2.0]])))

    def test_apply_moments_uses_given_transform(self):
        train = DataMatrix(np.array([[0.0, 2.0], [2.0, 6.0]]))
        mean, sd = column_moments(train.values)
        test = apply_moments(DataMatrix(np.array([[1.0, 4.0]])), mean, sd)
        assert np.array_equal(test.values, np.array([[0.0, 0.0]]))
        assert not test.standardized


class TestOlsResidual:
    def test_exact_fit(self):
        z = np.array([[1.0], [2.0], [3.0]])
        resid, beta = ols_residual(z[:, 0], z)
        assert beta == pytest.approx([1.0])
        assert np.max(np.abs(resid)) <= 1e-12

    def test_orthogonal_target(self):
        z = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        y = np.array([0.0, 0.0, 2.0])
        resid, beta = ols_residual(y, z)
        assert np.array_equal(resid, y)
        assert np.array_equal(beta, np.zeros(2))

    def test_intercept_column_by_hand(self):
        # normal equations: beta = mean(y) = 2, residual (-1, 0, 1)
        y = np.array([1.0, 2.0, 3.0])
        z = np.ones((3, 1))
        resid, beta = ols_residual(y, z)
        assert beta == pytest.approx([2.0])
        assert resid == pytest.approx([-1.0, 0.0, 1.0])

    def test_residual_orthogonal_to_design(self):
        rng = np.random.default_rng(1)
        y = rng.standard_normal(200)
        z = rng.standard_normal((200, 5))
        resid, _ = ols_residual(y, z)
        assert np.max(np.abs(z.T @ resid)) <= 1e-6 * np.linalg.norm(y)

    def test_duplicate_columns_rank_deficient(self):
        rng = np.random.default_rng(2)
        col = rng.standard_normal(50)
        with pytest.raises(RankDeficient):
            ols_residual(rng.standard_normal(50), np.column_stack([col, col]))

    def test_more_regressors_than_samples(self):
        with pytest.raises(RankDeficient):
            ols_residual(np.ones(2), np.eye(2, 3) + 1)

    def test_empty_design_returns_target(self):
        y = np.array([1.0, -1.0])
        resid, beta = ols_residual(y, np.empty((2, 0)))
        assert np.array_equal(resid, y)
        assert beta.size == 0


class TestPartialUpdate:
    def test_identical_columns_zero_out(self):
        state = ResidualState(np.array([[1.0, 1.0], [-1.0, -1.0]]))
        assert partial_update(state, 1, 0)
        assert state.rows[1][0] == 1.0
        assert np.array_equal(state.r[:, 1], np.zeros(2))
        assert state.update_count == 1

    def test_orthogonal_columns_record_zero(self):
        state = ResidualState(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert partial_update(state, 1, 0)
        assert state.rows[1][0] == 0.0  # written, value zero
        assert np.array_equal(state.r[:, 1], np.array([0.0, 1.0]))

    def test_hand_case(self):
        # coefficient <(1,0),(1,1)> / <(1,0),(1,0)> = 1; residual (0, 1)
        state = ResidualState(np.array([[1.0, 1.0], [0.0, 1.0]]))
        partial_update(state, 1, 0)
        assert state.rows[1][0] == 1.0
        assert np.array_equal(state.r[:, 1], np.array([0.0, 1.0]))

    def test_degenerate_source_skipped(self):
        state = ResidualState(np.array([[0.0, 1.0], [0.0, -1.0]]))
        assert not partial_update(state, 1, 0)
        assert state.skipped == [(1, 0)]
        assert 0 not in state.rows[1]
        assert state.update_count == 0

    def test_self_and_rewrite_rejected(self):
        state = ResidualState(np.eye(3))
        with pytest.raises(ValueError):
            partial_update(state, 1, 1)
        partial_update(state, 1, 0)
        with pytest.raises(ValueError, match="already"):
            partial_update(state, 1, 0)

    def test_diagonal_is_one_and_preserved(self):
        state = ResidualState(np.eye(4))
        assert all(state.rows[k][k] == 1.0 for k in range(4))

    def test_norm_never_increases(self):
        rng = np.random.default_rng(3)
        state = ResidualState(rng.standard_normal((100, 6)))
        for a in range(5):
            before = np.linalg.norm(state.r[:, 5])
            partial_update(state, 5, a)
            assert np.linalg.norm(state.r[:, 5]) <= before + 1e-12

    def test_state_does_not_alias_input(self):
        values = np.asfortranarray(np.array([[1.0, 1.0], [2.0, -2.0]]))
        state = ResidualState(values)
        partial_update(state, 1, 0)
        assert np.array_equal(values[:, 1], np.array([1.0, -2.0]))


class TestJointVsSequential:
    def test_orthogonal_design_any_order(self):
        # on pairwise-orthogonal regressors, one-at-a-time partial updates
        # reproduce the joint OLS residual in any order
        rng = np.random.default_rng(4)
        q, _ = np.linalg.qr(rng.standard_normal((40, 3)))
        y = rng.standard_normal(40)
        joint, _ = ols_residual(y, q)
        for order in permutations(range(3)):
            state = ResidualState(np.column_stack([q, y]))
            for a in order:
                partial_update(state, 3, a)
            seq = state.r[:, 3]
            assert np.linalg.norm(seq - joint) <= 1e-8 * np.linalg.norm(y)

    def test_mean_zero_preserved(self):
        rng = np.random.default_rng(5)
        x = standardize(DataMatrix(rng.standard_normal((64, 5))))
        state = ResidualState(x.values)
        for a in range(4):
            partial_update(state, 4, a)
        assert np.max(np.abs(state.r.mean(axis=0))) <= 1e-8

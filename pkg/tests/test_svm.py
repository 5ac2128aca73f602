"""Dual coordinate descent solver vs an independent convex-programming oracle."""

import cvxpy
import numpy as np
import pytest

from fastread import svm


def oracle_objective(X, y, cost):
    """Solve the same augmented-bias objective with a generic convex solver."""
    n, dim = X.shape
    w = cvxpy.Variable(dim)
    b = cvxpy.Variable()
    hinge = cvxpy.pos(1 - cvxpy.multiply(y, X @ w + b))
    problem = cvxpy.Problem(
        cvxpy.Minimize(0.5 * (cvxpy.sum_squares(w) + cvxpy.square(b)) + cost @ hinge)
    )
    problem.solve()
    return float(problem.value), np.asarray(w.value), float(b.value)


def costs_for(y, weights):
    cost = np.ones(y.shape[0])
    if weights is not None:
        cost = np.where(y > 0, weights.w_relevant, weights.w_irrelevant)
    return cost


class TestBalancedWeights:
    def test_even_split_is_unit(self):
        w = svm.balanced_weights(5, 5)
        assert (w.w_relevant, w.w_irrelevant) == (1.0, 1.0)

    def test_ten_thirty(self):
        w = svm.balanced_weights(10, 30)
        np.testing.assert_allclose([w.w_relevant, w.w_irrelevant], [2.0, 2.0 / 3.0])

    def test_one_ninetynine(self):
        w = svm.balanced_weights(1, 99)
        np.testing.assert_allclose([w.w_relevant, w.w_irrelevant], [50.0, 50.0 / 99.0])

    def test_minority_class_upweighted(self):
        w = svm.balanced_weights(3, 97)
        assert w.w_relevant > 1.0 > w.w_irrelevant
        np.testing.assert_allclose(w.w_relevant * 3, w.w_irrelevant * 97)
        np.testing.assert_allclose(w.w_relevant * 3, 100 / 2)

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            svm.balanced_weights(0, 10)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            svm.ClassWeights(w_relevant=-1.0, w_irrelevant=1.0)


class TestDecision:
    def test_dot_product(self):
        m = svm.LinearModel(weights=np.array([1.0, 0.0]), bias=0.0)
        np.testing.assert_allclose(m.decision(np.array([[2.0, 3.0]])), [2.0])

    def test_constant_model(self):
        m = svm.LinearModel(weights=np.zeros(2), bias=-1.0)
        np.testing.assert_allclose(m.decision(np.array([[5.0, 7.0]])), [-1.0])

    def test_dimension_mismatch(self):
        m = svm.LinearModel(weights=np.zeros(3), bias=0.0)
        with pytest.raises(ValueError):
            m.decision(np.array([[1.0, 2.0]]))

    def test_scores_in_input_order(self):
        m = svm.LinearModel(weights=np.array([1.0]), bias=0.0)
        np.testing.assert_allclose(
            m.decision(np.array([[3.0], [1.0], [2.0]])), [3.0, 1.0, 2.0]
        )


class TestTrain:
    def test_separable_pair_signs(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        y = np.array([-1.0, 1.0])
        m = svm.train(X, y, seed=0)
        scores = m.decision(X)
        assert scores[0] < 0 < scores[1]

    def test_single_class_degenerate(self):
        X = np.eye(3)
        with pytest.raises(svm.DegenerateTrainingError):
            svm.train(X, np.ones(3), seed=0)

    def test_row_label_mismatch(self):
        with pytest.raises(ValueError):
            svm.train(np.eye(3), np.array([1.0, -1.0]), seed=0)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(20, 6))
        y = np.where(rng.random(20) < 0.4, 1.0, -1.0)
        y[0], y[1] = 1.0, -1.0
        a = svm.train(X, y, seed=123)
        b = svm.train(X, y, seed=123)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_separable_with_large_c_fits_training_set(self):
        rng = np.random.default_rng(9)
        X = np.vstack([rng.normal(3.0, 0.3, size=(12, 2)), rng.normal(-3.0, 0.3, size=(12, 2))])
        y = np.array([1.0] * 12 + [-1.0] * 12)
        m = svm.train(X, y, seed=0, C=100.0)
        assert (np.sign(m.decision(X)) == y).all()

    def test_weighted_lifts_minority_score(self):
        # 1 positive vs 9 negatives: balancing must raise the positive's score
        rng = np.random.default_rng(17)
        X = rng.normal(size=(10, 3))
        y = np.array([1.0] + [-1.0] * 9)
        plain = svm.train(X, y, seed=0)
        weighted = svm.train(X, y, weights=svm.balanced_weights(1, 9), seed=0)
        assert weighted.decision(X[:1])[0] > plain.decision(X[:1])[0]

    def test_weighted_and_plain_objectives_match_oracle(self):
        rng = np.random.default_rng(17)
        X = rng.normal(size=(10, 3))
        y = np.array([1.0] + [-1.0] * 9)
        for weights in (None, svm.balanced_weights(1, 9)):
            m = svm.train(X, y, weights=weights, seed=0)
            ours = svm.objective(m, X, y, weights)
            ref, _, _ = oracle_objective(X, y, costs_for(y, weights))
            np.testing.assert_allclose(ours, ref, rtol=1e-3)

    def test_accepts_sparse_and_feature_matrix_inputs(self):
        from scipy import sparse

        X = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]])
        y = np.array([-1.0, 1.0, 1.0])
        dense = svm.train(X, y, seed=4)
        sparse_m = svm.train(sparse.csr_matrix(X), y, seed=4)
        np.testing.assert_allclose(dense.weights, sparse_m.weights)


class TestObjectiveOptimality:
    def test_small_instances_match_oracle(self):
        # every instance <= 6 points in <= 3 dims, within 1e-3 relative
        rng = np.random.default_rng(42)
        for trial in range(20):
            n = int(rng.integers(3, 7))
            dim = int(rng.integers(1, 4))
            X = rng.normal(size=(n, dim))
            y = np.concatenate(
                [[1.0, -1.0], np.where(rng.random(n - 2) < 0.5, 1.0, -1.0)]
            )
            weights = None
            if trial % 2:
                weights = svm.balanced_weights(int((y > 0).sum()), int((y < 0).sum()))
            m = svm.train(X, y, weights=weights, seed=trial)
            ours = svm.objective(m, X, y, weights)
            ref, _, _ = oracle_objective(X, y, costs_for(y, weights))
            assert abs(ours - ref) <= 1e-3 * max(1.0, abs(ref))

    def test_margins_match_oracle_on_separable_toy(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0], [-1.0, 2.0], [2.0, -1.0]])
        y = np.array([-1.0, 1.0, -1.0, 1.0])
        m = svm.train(X, y, seed=0, C=10.0, tol=1e-6)
        _, w_ref, b_ref = oracle_objective(X, y, np.full(4, 10.0))
        np.testing.assert_allclose(m.decision(X), X @ w_ref + b_ref, atol=1e-2)
        assert (np.abs(m.decision(X)) >= 1 - 1e-2).all()


class TestSolverDescent:
    def test_dual_objective_nonincreasing_per_epoch(self):
        # each coordinate step exactly minimizes the dual over its box, so the
        # dual value can never rise; the primal at epoch snapshots can
        rng = np.random.default_rng(8)
        for trial in range(10):
            n = int(rng.integers(5, 40))
            dim = int(rng.integers(2, 10))
            X = rng.normal(size=(n, dim))
            y = np.concatenate(
                [[1.0, -1.0], np.where(rng.random(n - 2) < 0.5, 1.0, -1.0)]
            )
            duals = []

            def record(epoch, model, alpha, duals=duals):
                reg = 0.5 * (model.weights @ model.weights + model.bias**2)
                duals.append(reg - alpha.sum())

            svm.train(X, y, seed=trial, callback=record)
            assert len(duals) >= 2
            assert (np.diff(np.array(duals)) <= 1e-9).all()

    def test_final_objective_at_most_any_epoch_snapshot(self):
        # descent ends at the best primal value seen, within solver tolerance
        rng = np.random.default_rng(21)
        X = rng.normal(size=(30, 8))
        y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
        y[0], y[1] = 1.0, -1.0
        primals = []

        def record(epoch, model, alpha):
            primals.append(svm.objective(model, X, y))

        m = svm.train(X, y, seed=3, callback=record)
        final = svm.objective(m, X, y)
        assert final <= min(primals) + 1e-9

    def test_scaling_weights_and_c_jointly_is_invariant(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(12, 4))
        y = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        y[0], y[1] = 1.0, -1.0
        base = svm.train(X, y, weights=svm.ClassWeights(2.0, 0.5), seed=7, C=1.0)
        scaled = svm.train(X, y, weights=svm.ClassWeights(8.0, 2.0), seed=7, C=0.25)
        np.testing.assert_array_equal(base.weights, scaled.weights)
        assert base.bias == scaled.bias

import numpy as np
import pytest

from sailprice.errors import EmptyInput, LengthMismatch, SchemaMismatch, UsageError
from sailprice.gradient_boosting import (
    BoostConfig,
    BoostedEnsemble,
    dumps_ensemble,
    fit_boosted,
    loads_ensemble,
    negative_gradient,
    predict_boosted,
    staged_predictions,
)
from sailprice.regression_tree import Leaf, TreeConfig, Internal, iter_leaves, leaf_ids, predict_tree_rows

from conftest import matrix


def _step_data(n=200, seed=0):
    x = np.random.default_rng(seed).uniform(size=(n, 1))
    return x, 10.0 * (x[:, 0] > 0.5)


def test_negative_gradient():
    assert negative_gradient([4.0], [1.0]).tolist() == [3.0]
    assert not negative_gradient([1.0, 2.0], [1.0, 2.0]).any()
    with pytest.raises(LengthMismatch):
        negative_gradient([1.0], [1.0, 2.0])


def test_negative_gradient_finite_difference():
    # per-prediction loss (y - p)^2 has derivative -2 (y - p): residual times 2
    y, p, h = np.array([3.0, -1.0, 0.5]), np.array([1.0, 1.0, 1.0]), 1e-5
    fd = -((y - (p + h)) ** 2 - (y - (p - h)) ** 2) / (2 * h)
    np.testing.assert_allclose(negative_gradient(y, p), fd / 2.0, rtol=1e-5)


def test_zero_iterations_predicts_mean():
    x, y = _step_data()
    ens, losses = fit_boosted(x, y, BoostConfig(n_iters=0))
    assert ens.trees == () and np.all(predict_boosted(ens, x) == y.mean())
    assert losses == [pytest.approx(np.var(y))]


def test_full_tree_interpolates_in_one_round():
    x = np.arange(8.0).reshape(-1, 1)
    y = np.array([3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, 6.0])
    cfg = BoostConfig(n_iters=1, learning_rate=1.0,
                      tree_config=TreeConfig(max_leaves=8, max_depth=8, min_samples_leaf=1))
    ens, _ = fit_boosted(x, y, cfg)
    np.testing.assert_allclose(predict_boosted(ens, x), y, atol=1e-12)


def test_step_function_fit():
    x, y = _step_data()
    ens, losses = fit_boosted(x, y, BoostConfig(n_iters=50, learning_rate=0.1))
    assert np.mean((y - predict_boosted(ens, x)) ** 2) < 0.01
    assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))


def test_leaf_values_are_mean_residuals():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(150, 2))
    y = x[:, 0] ** 2 + rng.normal(size=150)
    ens, _ = fit_boosted(x, y, BoostConfig(n_iters=5, learning_rate=0.3))
    pred = np.full(150, ens.initial_prediction)
    for tree in ens.trees:
        r = y - pred
        ids = leaf_ids(tree, x)
        for leaf in iter_leaves(tree):
            assert leaf.value == pytest.approx(r[ids == leaf.region_id].mean(), rel=1e-9, abs=1e-12)
        pred = pred + 0.3 * predict_tree_rows(tree, x)


def test_predict_matches_staged_updates():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(100, 3))
    y = np.sin(x[:, 0]) + x[:, 1]
    ens, _ = fit_boosted(x, y, BoostConfig(n_iters=40))
    stages = list(staged_predictions(ens, x))
    assert len(stages) == 41
    np.testing.assert_allclose(stages[-1], predict_boosted(ens, x), rtol=0, atol=1e-9)
    assert predict_boosted(ens, x).tobytes() == predict_boosted(ens, x).tobytes()


def test_training_mse_never_increases():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(200, 2))
    y = np.where(x[:, 0] > 0, 5.0, -5.0) + rng.normal(size=200)
    ens, _ = fit_boosted(x, y, BoostConfig(n_iters=60, learning_rate=0.5))
    mses = [np.mean((y - p) ** 2) for p in staged_predictions(ens, x)]
    assert all(b <= a + 1e-9 for a, b in zip(mses, mses[1:]))


def test_hand_built_ensemble():
    tree = Internal(0, 0.5, Leaf(-2.0, 0), Leaf(4.0, 1))
    ens = BoostedEnsemble(1.0, (tree,), 0.5, 0.0, None)
    assert predict_boosted(ens, [[0.0], [1.0]]).tolist() == [0.0, 3.0]
    empty = BoostedEnsemble(2.5, (), 0.1, 0.0, None)
    assert predict_boosted(empty, [[0.0], [9.0]]).tolist() == [2.5, 2.5]


def test_penalized_loss_trace_monotone():
    x, y = _step_data(seed=4)
    _, losses = fit_boosted(x, y, BoostConfig(n_iters=100, learning_rate=0.5, l2_lambda=0.01))
    assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))


def test_early_stop_on_tolerance():
    x, y = _step_data()
    ens, losses = fit_boosted(x, y, BoostConfig(n_iters=500, learning_rate=1.0))
    assert ens.n_iters < 500 and len(losses) == ens.n_iters + 1


def test_serialization_round_trip():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(120, 2))
    X = matrix(A, ["a", "b"])
    ens, _ = fit_boosted(X, A[:, 0] * 1e5 + rng.normal(size=120), BoostConfig(n_iters=20))
    back = loads_ensemble(dumps_ensemble(ens))
    assert back == ens
    assert predict_boosted(back, X).tobytes() == predict_boosted(ens, X).tobytes()


def test_errors():
    with pytest.raises(EmptyInput):
        fit_boosted([[0.0]], [1.0])
    with pytest.raises(UsageError):
        BoostConfig(learning_rate=1.5)
    X = matrix(np.zeros((4, 2)), ["a", "b"])
    ens, _ = fit_boosted(X, [1.0, 2.0, 3.0, 4.0], BoostConfig(n_iters=2))
    with pytest.raises(SchemaMismatch):
        predict_boosted(ens, matrix(np.zeros((4, 2)), ["b", "a"]))

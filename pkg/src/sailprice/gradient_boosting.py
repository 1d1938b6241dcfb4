"""Gradient boosting over regression trees with an L2 penalty on leaf values."""

from dataclasses import dataclass
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import EmptyInput, LengthMismatch, NonFiniteLoss, SchemaMismatch, UsageError
from .regression_tree import (
    TreeConfig,
    _Grower,
    dump_tree,
    fit_tree,
    iter_leaves,
    load_tree,
    predict_tree_rows,
)
from .serialize import fmt_float, parse_pairs


@dataclass(frozen=True)
class BoostConfig:
    n_iters: int = 500
    learning_rate: float = 0.1
    l2_lambda: float = 0.0
    tree_config: TreeConfig = TreeConfig()
    tol: Optional[float] = None  # None: 1e-10 times the initial loss

    def __post_init__(self):
        if self.n_iters < 0:
            raise UsageError("n_iters must be non-negative")
        if not 0.0 < self.learning_rate <= 1.0:
            raise UsageError("learning_rate must lie in (0, 1]")
        if self.l2_lambda < 0:
            raise UsageError("l2_lambda must be non-negative")


@dataclass(frozen=True)
class BoostedEnsemble:
    initial_prediction: float
    trees: tuple
    learning_rate: float
    l2_lambda: float = 0.0
    feature_names: Optional[tuple] = None

    @property
    def n_iters(self):
        return len(self.trees)

    def penalty(self):
        """lambda * sum of squared (learning-rate-scaled) leaf values over all trees."""
        a = self.learning_rate
        return self.l2_lambda * sum((a * leaf.value) ** 2
                                    for tree in self.trees for leaf in iter_leaves(tree))


def negative_gradient(targets, predictions):
    """Residuals y - yhat: the negative gradient of the squared error, the 2/n factor folded into
    the learning rate."""
    y = np.asarray(targets, dtype=float).ravel()
    y_hat = np.asarray(predictions, dtype=float).ravel()
    if y.shape != y_hat.shape:
        raise LengthMismatch(f"{y.size} targets vs {y_hat.size} predictions")
    return y - y_hat


def _rows_of(X, feature_names=None):
    if hasattr(X, "rows"):
        if feature_names is not None and tuple(X.schema.names) != tuple(feature_names):
            raise SchemaMismatch(f"matrix columns {X.schema.names} != ensemble columns {feature_names}")
        return X.raw_rows()
    rows = np.asarray(X, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    if feature_names is not None and rows.shape[1] != len(feature_names):
        raise SchemaMismatch(f"{rows.shape[1]} columns vs {len(feature_names)} ensemble features")
    return rows


def fit_boosted(X, y, config: BoostConfig = BoostConfig()):
    """Boost trees on residuals; returns (ensemble, losses).

    Starts from the target mean, then each round fits a tree to the current
    residuals and adds learning_rate times its output. ``losses[k]`` is the
    training loss (MSE plus lambda times the squared scaled leaf values)
    after k trees; fitting stops early once a round improves it by less than
    ``tol``.
    """
    rows = _rows_of(X)
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 2:
        raise EmptyInput("boosting needs at least two rows")
    if rows.shape[0] != y.size:
        raise LengthMismatch(f"{rows.shape[0]} rows vs {y.size} targets")
    names = tuple(X.schema.names) if hasattr(X, "schema") else None
    n = y.size
    alpha, lam = config.learning_rate, config.l2_lambda
    initial = float(np.mean(y))
    pred = np.full(n, initial)
    penalty = 0.0
    loss = float(np.mean((y - pred) ** 2))
    losses = [loss]
    tol = config.tol if config.tol is not None else 1e-10 * loss
    grower = _Grower(rows, y, config.tree_config, lam)
    trees = []
    for _ in range(config.n_iters):
        r = negative_gradient(y, pred)
        tree = fit_tree(rows, r, config.tree_config, lam, _grower=grower)
        step = predict_tree_rows(tree, rows)
        new_pred = pred + alpha * step
        penalty += lam * sum((alpha * leaf.value) ** 2 for leaf in iter_leaves(tree))
        new_loss = float(np.mean((y - new_pred) ** 2)) + penalty
        if not math.isfinite(new_loss):
            raise NonFiniteLoss("boosting loss became non-finite")
        trees.append(tree)
        pred = new_pred
        losses.append(new_loss)
        if losses[-2] - new_loss < tol:
            break
    return BoostedEnsemble(initial, tuple(trees), alpha, lam, names), losses


def predict_boosted(ensemble, X):
    """initial + learning_rate * sum of tree outputs, per row."""
    rows = _rows_of(X, ensemble.feature_names)
    total = np.zeros(rows.shape[0])
    for tree in ensemble.trees:
        total += predict_tree_rows(tree, rows)
    return ensemble.initial_prediction + ensemble.learning_rate * total


def staged_predictions(ensemble, X):
    """Predictions after 0, 1, ..., n_iters trees, applying each update in turn."""
    rows = _rows_of(X, ensemble.feature_names)
    pred = np.full(rows.shape[0], ensemble.initial_prediction)
    yield pred.copy()
    for tree in ensemble.trees:
        pred = pred + ensemble.learning_rate * predict_tree_rows(tree, rows)
        yield pred.copy()


def dumps_ensemble(ensemble):
    lines = [
        "format=boosted_ensemble/1",
        f"initial={fmt_float(ensemble.initial_prediction)}",
        f"learning_rate={fmt_float(ensemble.learning_rate)}",
        f"l2_lambda={fmt_float(ensemble.l2_lambda)}",
        f"n_iters={ensemble.n_iters}",
        f"features={','.join(ensemble.feature_names or ())}",
    ]
    for i, tree in enumerate(ensemble.trees):
        lines.append(f"tree={i}")
        lines += dump_tree(tree)
    return "\n".join(lines) + "\n"


def loads_ensemble(text):
    header, blocks, current = [], [], None
    for line in text.splitlines():
        if line.startswith("tree="):
            current = []
            blocks.append(current)
        elif current is None:
            header.append(line)
        else:
            current.append(line)
    pairs = parse_pairs(header)
    if pairs.get("format") != "boosted_ensemble/1":
        raise SchemaMismatch("not a boosted ensemble file")
    trees = tuple(load_tree(block) for block in blocks)
    if len(trees) != int(pairs["n_iters"]):
        raise SchemaMismatch(f"header says {pairs['n_iters']} trees, found {len(trees)}")
    names = tuple(pairs["features"].split(",")) if pairs.get("features") else None
    return BoostedEnsemble(float(pairs["initial"]), trees, float(pairs["learning_rate"]),
                           float(pairs["l2_lambda"]), names)


def save_ensemble(ensemble, path):
    Path(path).write_text(dumps_ensemble(ensemble), encoding="utf-8")


def load_ensemble(path):
    return loads_ensemble(Path(path).read_text(encoding="utf-8"))

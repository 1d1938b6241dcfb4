"""Multiple-variable linear regression: closed-form OLS, L2-penalized gradient descent, prediction."""

from dataclasses import dataclass
import math
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core_data import FeatureMatrix, FeatureSchema, StandardizationParams
from .errors import Diverged, EmptyInput, LengthMismatch, RankDeficient, SchemaMismatch, UsageError
from .metrics import mse
from .serialize import (
    dump_schema,
    dump_standardization,
    fmt_float,
    load_schema,
    load_standardization,
    parse_pairs,
)

# Reciprocal condition number below which the scaled normal matrix counts as singular.
RCOND_LIMIT = 1e-12
# Largest absolute feature value accepted by the iterative trainers without standardization.
RAW_MAGNITUDE_LIMIT = 1e3


@dataclass(frozen=True)
class LinearModel:
    schema: FeatureSchema
    coefficients: dict
    intercept: float
    standardization: Optional[StandardizationParams] = None

    def __post_init__(self):
        if tuple(self.coefficients) != self.schema.names:
            raise SchemaMismatch("coefficient names must match schema columns in order")
        values = list(self.coefficients.values()) + [self.intercept]
        if not all(math.isfinite(v) for v in values):
            raise Diverged("non-finite model parameter")

    @property
    def coef_vector(self):
        return np.array(list(self.coefficients.values()), dtype=float)

    @property
    def theta(self):
        """Parameters as one vector: intercept first, then coefficients."""
        return np.concatenate(([self.intercept], self.coef_vector))

    @classmethod
    def from_theta(cls, schema, theta, standardization=None):
        theta = np.asarray(theta, dtype=float)
        coefs = {n: float(v) for n, v in zip(schema.names, theta[1:])}
        return cls(schema, coefs, float(theta[0]), standardization)


@dataclass
class GDConfig:
    learning_rate: float = 0.1
    l2_lambda: float = 0.0
    max_iters: int = 50_000
    tol: Optional[float] = None  # None: 1e-8 times the initial loss
    seed: int = 0
    random_init: bool = False

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise UsageError("learning_rate must be positive")
        if self.l2_lambda < 0:
            raise UsageError("l2_lambda must be non-negative")
        if self.max_iters < 0:
            raise UsageError("max_iters must be non-negative")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tol must be positive")


def _check_xy(X, y):
    y = np.asarray(y, dtype=float).ravel()
    if X.n != y.size:
        raise LengthMismatch(f"{X.n} rows vs {y.size} targets")
    if y.size == 0:
        raise EmptyInput("no rows")
    return y


def model_rows(model, X):
    """X's rows expressed in the coordinates the model was fitted in."""
    if X.schema.names != model.schema.names:
        raise SchemaMismatch(f"matrix columns {X.schema.names} != model columns {model.schema.names}")
    if X.standardization == model.standardization:
        return X.rows
    raw = X.raw_rows()
    if model.standardization is None:
        return raw
    return model.standardization.apply(raw, X.schema)


def predict(model, X):
    rows = model_rows(model, X)
    return model.intercept + rows @ model.coef_vector


def _offending_column(B, names):
    for j in range(1, B.shape[1] + 1):
        sub = B[:, :j]
        sv = np.linalg.svd(sub, compute_uv=False)
        if sv[-1] <= math.sqrt(RCOND_LIMIT) * sv[0]:
            return names[j - 1]
    return None


def fit_ols(X: FeatureMatrix, y) -> LinearModel:
    """Least squares with intercept via the normal equations.

    Columns are centred (absorbing the intercept) and scaled to unit norm
    before forming the normal matrix, which is then Cholesky-solved after a
    condition check. The solution is mapped back to the matrix's own units.
    """
    y = _check_xy(X, y)
    n, p = X.rows.shape
    if n < p + 1:
        raise RankDeficient(f"need at least {p + 1} rows for {p} columns, got {n}")
    names = X.schema.names
    A = X.rows
    mu = A.mean(axis=0)
    y_mean = y.mean()
    if p == 0:
        return LinearModel(X.schema, {}, float(y_mean), X.standardization)
    Ac = A - mu
    norms = np.sqrt(np.sum(Ac * Ac, axis=0))
    constant = [names[j] for j in range(p) if not norms[j] > 0]
    if constant:
        raise RankDeficient(f"column {constant[0]!r} is constant (collinear with the intercept)",
                            column=constant[0])
    B = Ac / norms
    G = B.T @ B
    eig = np.linalg.eigvalsh(G)
    if eig[0] <= RCOND_LIMIT * eig[-1]:
        col = _offending_column(B, names)
        raise RankDeficient(f"normal matrix is singular; column {col!r} is a linear "
                            f"combination of earlier columns and the intercept", column=col)
    yc = y - y_mean
    factor = cho_factor(G)
    z = cho_solve(factor, B.T @ yc)
    # one refinement step against the residual
    z += cho_solve(factor, B.T @ (yc - B @ z))
    beta = z / norms
    intercept = y_mean - mu @ beta
    return LinearModel(X.schema, {nm: float(b) for nm, b in zip(names, beta)},
                       float(intercept), X.standardization)


def _loss(rows, y, theta, lam):
    r = y - theta[0] - rows @ theta[1:]
    return float(np.sum(r * r) / y.size + lam * np.sum(theta[1:] ** 2))


def _gradient(rows, y, theta, lam):
    n = y.size
    r = y - theta[0] - rows @ theta[1:]
    g = np.empty_like(theta)
    g[0] = -2.0 * np.sum(r) / n
    g[1:] = -2.0 * (rows.T @ r) / n + 2.0 * lam * theta[1:]
    return g


def loss_l2(X, y, model, lam):
    """Mean squared error plus lam times the sum of squared coefficients (intercept unpenalized)."""
    if lam < 0:
        raise UsageError("lambda must be non-negative")
    y = _check_xy(X, y)
    return mse(y, predict(model, X)) + lam * float(np.sum(model.coef_vector ** 2))


def gradient_l2(X, y, model, lam):
    """Gradient of ``loss_l2`` w.r.t. (intercept, coefficients...)."""
    y = _check_xy(X, y)
    return _gradient(model_rows(model, X), y, model.theta, lam)


def _check_scaled(X):
    if X.standardization is None and X.rows.size and np.max(np.abs(X.rows)) > RAW_MAGNITUDE_LIMIT:
        raise UsageError("iterative trainers need standardized features "
                         f"(found |x| > {RAW_MAGNITUDE_LIMIT:g}); build the matrix with standardize=True")


def fit_gd(X: FeatureMatrix, y, config: GDConfig = None):
    """Batch gradient descent on the L2 loss.

    Returns (model, losses) where ``losses[0]`` is the loss at the starting
    point and ``losses[k]`` the loss after step k. Any loss increase halves
    the learning rate and restarts from the starting point (at most 10 times).
    """
    config = config or GDConfig()
    _check_scaled(X)
    y = _check_xy(X, y)
    rows = X.rows
    lam = config.l2_lambda
    theta0 = np.zeros(X.p + 1)
    if config.random_init:
        from .rng import XorShift64Star

        rng = XorShift64Star(config.seed)
        theta0 = np.array([rng.gauss(0.0, 0.01) for _ in range(X.p + 1)])
    alpha = config.learning_rate
    initial = _loss(rows, y, theta0, lam)
    tol = config.tol if config.tol is not None else 1e-8 * initial
    for _halving in range(11):
        theta = theta0.copy()
        losses = [initial]
        restart = False
        for _ in range(config.max_iters):
            theta = theta - alpha * _gradient(rows, y, theta, lam)
            loss = _loss(rows, y, theta, lam)
            if not math.isfinite(loss) or loss > losses[-1]:
                restart = True
                break
            losses.append(loss)
            if losses[-2] - loss < tol:
                break
        if not restart:
            return LinearModel.from_theta(X.schema, theta, X.standardization), losses
        alpha *= 0.5
    raise Diverged(f"gradient descent diverged after 10 learning-rate halvings (alpha={alpha:g})")


def ridge_closed_form(X: FeatureMatrix, y, lam):
    """Minimizer of ``loss_l2``: (Xc'Xc + n*lam*I) b = Xc'yc on centred data."""
    y = _check_xy(X, y)
    A = X.rows
    mu = A.mean(axis=0)
    Ac = A - mu
    yc = y - y.mean()
    beta = np.linalg.solve(Ac.T @ Ac + y.size * lam * np.eye(X.p), Ac.T @ yc)
    return LinearModel(X.schema, {n: float(b) for n, b in zip(X.schema.names, beta)},
                       float(y.mean() - mu @ beta), X.standardization)


def destandardize(model):
    """Same predictor expressed on raw (unscaled) columns."""
    params = model.standardization
    if params is None:
        return model
    coefs = dict(model.coefficients)
    intercept = model.intercept
    for name, m, s in zip(params.columns, params.means, params.scales):
        coefs[name] = model.coefficients[name] / s
        intercept -= model.coefficients[name] * m / s
    return LinearModel(model.schema, coefs, intercept, None)


def dumps_linear_model(model):
    lines = ["format=linear_model/1"]
    lines += dump_schema(model.schema)
    lines.append(f"intercept={fmt_float(model.intercept)}")
    lines += [f"coef.{n}={fmt_float(v)}" for n, v in model.coefficients.items()]
    lines += dump_standardization(model.standardization)
    return "\n".join(lines) + "\n"


def loads_linear_model(text):
    pairs = parse_pairs(text.splitlines())
    if pairs.get("format") != "linear_model/1":
        raise SchemaMismatch("not a linear model file")
    schema = load_schema(pairs)
    coefs = {n: float(pairs[f"coef.{n}"]) for n in schema.names}
    return LinearModel(schema, coefs, float(pairs["intercept"]),
                       load_standardization(pairs, schema))


def save_linear_model(model, path):
    Path(path).write_text(dumps_linear_model(model), encoding="utf-8")


def load_linear_model(path):
    return loads_linear_model(Path(path).read_text(encoding="utf-8"))

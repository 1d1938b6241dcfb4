"""ADADELTA optimizer and a linear-model trainer built on it."""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import DimensionMismatch, Diverged, NonFiniteGradient, UsageError
from .linear_model import LinearModel, _check_scaled, _check_xy, _gradient, _loss

DEFAULT_RHO = 0.95
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class AdadeltaState:
    avg_sq_grad: np.ndarray
    avg_sq_update: np.ndarray
    rho: float = DEFAULT_RHO
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise UsageError("rho must lie in (0, 1)")
        if not self.epsilon > 0:
            raise UsageError("epsilon must be positive")

    @classmethod
    def zeros(cls, size, rho=DEFAULT_RHO, epsilon=DEFAULT_EPSILON):
        return cls(np.zeros(size), np.zeros(size), rho, epsilon)


def adadelta_step(state: AdadeltaState, params, grads):
    """One coordinate-wise update; returns (new_state, new_params).

    E[g^2] <- rho E[g^2] + (1 - rho) g^2
    dx     =  -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
    x      <- x + dx
    """
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if not (params.shape == grads.shape == state.avg_sq_grad.shape == state.avg_sq_update.shape):
        raise DimensionMismatch(f"params {params.shape}, grads {grads.shape}, "
                                f"state {state.avg_sq_grad.shape}")
    if not np.all(np.isfinite(grads)):
        raise NonFiniteGradient("gradient contains non-finite values")
    rho, eps = state.rho, state.epsilon
    sq_grad = rho * state.avg_sq_grad + (1.0 - rho) * grads * grads
    update = -np.sqrt(state.avg_sq_update + eps) / np.sqrt(sq_grad + eps) * grads
    sq_update = rho * state.avg_sq_update + (1.0 - rho) * update * update
    return replace(state, avg_sq_grad=sq_grad, avg_sq_update=sq_update), params + update


def peak_curvature(rows, l2_lambda=0.0):
    """Largest Hessian eigenvalue of the L2 loss in (intercept, coefficients)."""
    n = rows.shape[0]
    A = np.hstack([np.ones((n, 1)), rows])
    H = 2.0 * (A.T @ A) / n
    H[1:, 1:] += 2.0 * l2_lambda * np.eye(rows.shape[1])
    return float(np.linalg.eigvalsh(H)[-1])


def fit_adadelta(X, y, l2_lambda=0.0, rho=DEFAULT_RHO, epsilon=DEFAULT_EPSILON,
                 max_iters=20_000, tol=None, scale_target=True, normalize_curvature=True):
    """Fit the L2-penalized linear model with ADADELTA.

    Parameters start at zero (in price units). With ``scale_target`` the
    optimizer runs on (y - mean) / std; with ``normalize_curvature`` the
    loss it sees is further divided by its peak Hessian eigenvalue. Both are
    positive rescalings that leave the minimizer unchanged. Once gradients
    fall below sqrt(epsilon) the ADADELTA step tends to one gradient length,
    which only settles when the curvature is below 2. Parameters and the loss
    trace are reported in price units.

    ``tol`` is an absolute loss-decrease threshold in price units (default
    1e-12 times the initial loss), checked after the first 100 iterations.
    Returns (model, losses) with ``losses[0]`` at the starting point.
    """
    _check_scaled(X)
    y = _check_xy(X, y)
    rows = X.rows
    if max_iters < 0:
        raise UsageError("max_iters must be non-negative")
    if scale_target:
        shift = float(y.mean())
        scale = float(y.std()) or 1.0
    else:
        shift, scale = 0.0, 1.0
    ys = (y - shift) / scale
    curvature = peak_curvature(rows, l2_lambda) if normalize_curvature else 1.0
    # zero parameters in price units
    theta = np.zeros(X.p + 1)
    theta[0] = -shift / scale
    state = AdadeltaState.zeros(X.p + 1, rho, epsilon)
    unit = scale * scale
    losses = [_loss(rows, ys, theta, l2_lambda) * unit]
    tol = tol if tol is not None else 1e-12 * losses[0]
    for it in range(max_iters):
        grads = _gradient(rows, ys, theta, l2_lambda) / curvature
        state, theta = adadelta_step(state, theta, grads)
        loss = _loss(rows, ys, theta, l2_lambda) * unit
        if not math.isfinite(loss):
            raise Diverged("ADADELTA loss became non-finite")
        losses.append(loss)
        if it >= 100 and abs(losses[-2] - loss) < tol:
            break
    out = theta * scale
    out[0] += shift
    return LinearModel.from_theta(X.schema, out, X.standardization), losses

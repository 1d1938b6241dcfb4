"""Residuals, mean squared error and mean absolute error."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import EmptyInput, LengthMismatch


def _pair(actual, predicted):
    y = np.asarray(actual, dtype=float).ravel()
    y_hat = np.asarray(predicted, dtype=float).ravel()
    if y.shape != y_hat.shape:
        raise LengthMismatch(f"length mismatch: {y.size} actual vs {y_hat.size} predicted")
    return y, y_hat


def residuals(actual, predicted):
    """y_i - yhat_i, elementwise."""
    y, y_hat = _pair(actual, predicted)
    return y - y_hat


def _nonempty_residuals(actual, predicted):
    r = residuals(actual, predicted)
    if r.size == 0:
        raise EmptyInput("metrics need at least one observation")
    return r


# np.sum uses pairwise summation on contiguous float arrays.
def mse(actual, predicted):
    r = _nonempty_residuals(actual, predicted)
    return float(np.sum(r * r) / r.size)


def mae(actual, predicted):
    r = _nonempty_residuals(actual, predicted)
    return float(np.sum(np.abs(r)) / r.size)


@dataclass(frozen=True)
class EvalReport:
    model_name: str
    split_name: str
    n: int
    mse: float
    mae: float
    residuals: tuple

    @classmethod
    def from_predictions(cls, model_name, split_name, actual, predicted):
        r = _nonempty_residuals(actual, predicted)
        return cls(model_name, split_name, int(r.size), mse(actual, predicted),
                   mae(actual, predicted), tuple(float(v) for v in r))

    @property
    def rmse(self):
        return math.sqrt(self.mse)

"""Half/half cross-validation, the swap sensitivity check and model comparison tables."""

import csv
from dataclasses import dataclass, field
import io
import math
from typing import Optional

from .adadelta import DEFAULT_EPSILON, DEFAULT_RHO, fit_adadelta
from .core_data import DEFAULT_FEATURES, RegionScheme, build_design_matrix
from .errors import DataError, TooFewRows, UsageError
from .gradient_boosting import BoostConfig, fit_boosted, predict_boosted
from .linear_model import GDConfig, fit_gd, fit_ols, predict
from .metrics import EvalReport
from .regression_tree import TreeConfig
from .rng import XorShift64Star
from .serialize import fmt_float

FAMILIES = ("ols", "gd", "adadelta", "gbr")
# Iterative linear trainers need scaled inputs; OLS and trees do not.
STANDARDIZE_BY_DEFAULT = {"ols": False, "gd": True, "adadelta": True, "gbr": False}


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: dict = field(default_factory=dict)
    features: tuple = DEFAULT_FEATURES
    region_scheme: Optional[RegionScheme] = None
    standardize: Optional[bool] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown model family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.region_scheme is not None:
            object.__setattr__(self, "region_scheme", RegionScheme(self.region_scheme))

    @property
    def label(self):
        return self.name or self.family

    @property
    def scaled(self):
        return STANDARDIZE_BY_DEFAULT[self.family] if self.standardize is None else self.standardize


@dataclass
class FittedModel:
    spec: ModelSpec
    model: object
    standardization: object
    losses: Optional[list] = None

    def design(self, records):
        X, y, _ = build_design_matrix(records, self.spec.features, self.spec.region_scheme,
                                      drop_base=True, params=self.standardization)
        return X, y

    def predict(self, records):
        X, _ = self.design(records)
        if self.spec.family == "gbr":
            return predict_boosted(self.model, X)
        return predict(self.model, X)


def _gd_config(params):
    return GDConfig(
        learning_rate=float(params.get("learning_rate", 0.1)),
        l2_lambda=float(params.get("l2_lambda", 0.0)),
        max_iters=int(params.get("max_iters", 50_000)),
        tol=float(params["tol"]) if params.get("tol") not in (None, "") else None,
    )


def _boost_config(params):
    return BoostConfig(
        n_iters=int(params.get("n_iters", 500)),
        learning_rate=float(params.get("learning_rate", 0.1)),
        l2_lambda=float(params.get("l2_lambda", 0.0)),
        tree_config=TreeConfig(
            max_leaves=int(params.get("max_leaves", 8)),
            max_depth=int(params.get("max_depth", 4)),
            min_samples_leaf=int(params.get("min_samples_leaf", 5)),
        ),
        tol=float(params["tol"]) if params.get("tol") not in (None, "") else None,
    )


def fit_model(records, spec: ModelSpec) -> FittedModel:
    """Fit one family on ``records``; standardization statistics come from these rows only."""
    X, y, params = build_design_matrix(records, spec.features, spec.region_scheme,
                                       drop_base=True, standardize=spec.scaled)
    p = spec.params
    if spec.family == "ols":
        return FittedModel(spec, fit_ols(X, y), params)
    if spec.family == "gd":
        model, losses = fit_gd(X, y, _gd_config(p))
        return FittedModel(spec, model, params, losses)
    if spec.family == "adadelta":
        model, losses = fit_adadelta(
            X, y,
            l2_lambda=float(p.get("l2_lambda", 0.0)),
            rho=float(p.get("rho", DEFAULT_RHO)),
            epsilon=float(p.get("epsilon", DEFAULT_EPSILON)),
            max_iters=int(p.get("max_iters", 20_000)),
            tol=float(p["tol"]) if p.get("tol") not in (None, "") else None,
        )
        return FittedModel(spec, model, params, losses)
    model, losses = fit_boosted(X, y, _boost_config(p))
    return FittedModel(spec, model, params, losses)


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    half_a_ids: tuple
    half_b_ids: tuple

    def swapped(self):
        return SplitPlan(self.seed, self.half_b_ids, self.half_a_ids)


def make_split(ids, seed=42):
    """Shuffle with the seeded stream (Fisher-Yates), then cut in half; A gets the odd row."""
    ids = list(ids)
    if len(ids) < 2:
        raise TooFewRows(f"need at least 2 rows to split, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise DataError("record ids must be unique to split")
    XorShift64Star(seed).shuffle(ids)
    cut = (len(ids) + 1) // 2
    return SplitPlan(seed, tuple(ids[:cut]), tuple(ids[cut:]))


def _halves(records, split):
    by_id = {r.id: r for r in records}
    if len(by_id) != len(records):
        raise DataError("record ids must be unique")
    try:
        a = [by_id[i] for i in split.half_a_ids]
        b = [by_id[i] for i in split.half_b_ids]
    except KeyError as exc:
        raise DataError(f"split refers to unknown record id {exc}") from None
    return a, b


def evaluate(train, test, spec, split_name):
    fitted = fit_model(train, spec)
    _, y = fitted.design(test)
    return fitted, EvalReport.from_predictions(spec.label, split_name, y, fitted.predict(test))


def relative_gap(a, b):
    lo = min(a, b)
    if lo == 0:
        return 0.0 if a == b else math.inf
    return abs(a - b) / lo


@dataclass(frozen=True)
class SwapResult:
    forward: EvalReport
    backward: EvalReport

    @property
    def relative_mse_gap(self):
        return relative_gap(self.forward.mse, self.backward.mse)

    @property
    def relative_mae_gap(self):
        return relative_gap(self.forward.mae, self.backward.mae)

    def within(self, limit=0.10):
        return self.relative_mse_gap <= limit and self.relative_mae_gap <= limit


def run_swap(records, spec: ModelSpec, split: SplitPlan) -> SwapResult:
    """Train on A and test on B, then train on B and test on A."""
    a, b = _halves(records, split)
    _, forward = evaluate(a, b, spec, "A->B")
    _, backward = evaluate(b, a, spec, "B->A")
    return SwapResult(forward, backward)


def compare_models(records, specs, split: SplitPlan):
    """One forward (train A, test B) EvalReport per spec, in the given order."""
    specs = list(specs)
    if not specs:
        raise UsageError("compare needs at least one model spec")
    a, b = _halves(records, split)
    return [evaluate(a, b, spec, "A->B")[1] for spec in specs]


TABLE_COLUMNS = ("model", "split", "n", "mse", "mae")


def table_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in reports:
        w.writerow([r.model_name, r.split_name, r.n, fmt_float(r.mse), fmt_float(r.mae)])
    return buf.getvalue()


def table_markdown(reports):
    lines = ["| model | split | n | mse | mae |", "|---|---|---:|---:|---:|"]
    for r in reports:
        lines.append(f"| {r.model_name} | {r.split_name} | {r.n} | {r.mse:.6g} | {r.mae:.6g} |")
    return "\n".join(lines) + "\n"


SWAP_COLUMNS = ("model", "mse_forward", "mse_backward", "mae_forward", "mae_backward",
                "relative_mse_gap", "relative_mae_gap", "within_10pct")


def swap_csv(results, limit=0.10):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWAP_COLUMNS)
    for s in results:
        w.writerow([s.forward.model_name, fmt_float(s.forward.mse), fmt_float(s.backward.mse),
                    fmt_float(s.forward.mae), fmt_float(s.backward.mae),
                    fmt_float(s.relative_mse_gap), fmt_float(s.relative_mae_gap),
                    "yes" if s.within(limit) else "no"])
    return buf.getvalue()

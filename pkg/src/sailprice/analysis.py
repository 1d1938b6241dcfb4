"""Feature/price correlations, regional price effects and the Hong Kong relabeling counterfactual."""

from dataclasses import dataclass, replace
import math

import numpy as np

from .core_data import (
    DEFAULT_FEATURES,
    GDP_COLUMNS,
    HULL,
    REGION,
    ColumnKind,
    Hull,
    Region,
    RegionScheme,
    SCHEME_LEVELS,
    build_design_matrix,
    encode_hull,
)
from .errors import SchemaMismatch, SingleRegion, TooFewRows, UsageError, ZeroVariance
from .evaluation import ModelSpec, fit_model
from .linear_model import LinearModel, predict
from .rng import XorShift64Star


@dataclass(frozen=True)
class CorrelationResult:
    feature: str
    pearson_r: float
    trend_slope: float
    trend_intercept: float
    n: int


def _feature_values(records, feature):
    if feature == HULL:
        return np.array([encode_hull(r.hull) for r in records])
    return np.array([float(getattr(r, feature)) for r in records])


def pearson_and_trend(x, y):
    """(r, slope, intercept) of the least-squares line of y on x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.sum(dx * dx))
    syy = float(np.sum(dy * dy))
    if not sxx > 0 or not syy > 0:
        raise ZeroVariance("correlation undefined for a constant series")
    sxy = float(np.sum(dx * dy))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    slope = sxy / sxx
    return r, slope, float(y.mean() - slope * x.mean())


def correlate_features(records, features=None):
    """Pearson r and a univariate trend line of listing price on each feature.

    Defaults to the eight price regressors, plus the GDP columns when every
    record carries them. For the 0/1 hull indicator r is point-biserial and
    the slope is mean(catamaran) - mean(monohull).
    """
    if len(records) < 3:
        raise TooFewRows(f"correlation needs at least 3 records, got {len(records)}")
    if features is None:
        features = list(DEFAULT_FEATURES)
        for g in GDP_COLUMNS:
            if all(getattr(r, g) is not None for r in records):
                features.append(g)
    y = np.array([r.listing_price for r in records])
    out = []
    for f in features:
        x = _feature_values(records, f)
        try:
            r, slope, intercept = pearson_and_trend(x, y)
        except ZeroVariance:
            raise ZeroVariance(f"feature {f!r} (or the price) is constant") from None
        out.append(CorrelationResult(f, r, slope, intercept, len(records)))
    return out


@dataclass(frozen=True)
class RegionalEffects:
    base_region: Region
    effects: dict
    model: LinearModel
    scheme: RegionScheme


def scheme_for(records):
    if any(r.region is Region.HONG_KONG for r in records):
        return RegionScheme.FOUR_REGION_HK
    return RegionScheme.THREE_REGION


def region_coefficients(model):
    """Region effects relative to the model's dropped base level, read off its dummy columns."""
    group = next((c for c in model.schema.columns
                  if c.name == REGION and c.kind is ColumnKind.ONE_HOT_GROUP), None)
    if group is None or group.dropped_level is None:
        raise SchemaMismatch("model has no base-dropped region dummy group")
    out = {Region(group.dropped_level): 0.0}
    for level, name in zip(group.kept_levels, group.output_names):
        out[Region(level)] = model.coefficients[name]
    return out


def fit_regional(records, model_family="ols", scheme=None, base=Region.CARIBBEAN,
                 features=DEFAULT_FEATURES, params=None):
    """Linear price model on the technical features plus region dummies (Caribbean dropped).

    Effects are the dummy coefficients, re-expressed relative to ``base``.
    """
    if model_family not in ("ols", "gd", "adadelta"):
        raise UsageError("regional effects need a linear model family (ols, gd or adadelta)")
    regions = {r.region for r in records}
    if len(regions) < 2:
        raise SingleRegion(f"all records share one region ({next(iter(regions)).value}); "
                           "regional effects are not identifiable")
    scheme = RegionScheme(scheme) if scheme is not None else scheme_for(records)
    spec = ModelSpec(model_family, dict(params or {}), tuple(features), scheme)
    fitted = fit_model(records, spec)
    raw = region_coefficients(fitted.model)
    base = Region(base)
    if base not in raw:
        raise UsageError(f"base region {base.value} is not part of {scheme.value}")
    effects = {r: raw[r] - raw[base] for r in SCHEME_LEVELS[scheme]}
    effects[base] = 0.0
    return RegionalEffects(base, effects, fitted.model, scheme)


@dataclass(frozen=True)
class CounterfactualRow:
    id: str
    hull: Hull
    original_region: Region
    pred_original: float
    pred_hk: float

    @property
    def delta(self):
        return self.pred_hk - self.pred_original


@dataclass(frozen=True)
class HullSummary:
    hull: Hull
    count: int
    mean_original: float
    mean_hk: float
    mean_delta: float


def _model_design(model, records):
    schema = model.schema
    numeric = schema.numeric_names()
    names = set(numeric)
    group_names = {c.name for c in schema.columns if c.kind is ColumnKind.ONE_HOT_GROUP}
    if HULL in group_names:
        names.add(HULL)
    region = next((c for c in schema.columns if c.name == REGION), None)
    if region is None or Region.HONG_KONG.value not in (region.group_levels or ()):
        raise SchemaMismatch("counterfactual needs a model trained with the four-region (HK) scheme")
    X, _, _ = build_design_matrix(records, tuple(names), RegionScheme.FOUR_REGION_HK,
                                  drop_base=region.dropped_level is not None,
                                  params=model.standardization)
    if X.schema.names != schema.names:
        raise SchemaMismatch(f"cannot rebuild model columns {schema.names}")
    return X


def sample_non_hk(records, sample_size, seed):
    """Seeded sample of non-HK records, returned in their original order."""
    pool = [i for i, r in enumerate(records) if r.region is not Region.HONG_KONG]
    XorShift64Star(seed).shuffle(pool)
    chosen = sorted(pool[:min(sample_size, len(pool))])
    return [records[i] for i in chosen]


def hk_counterfactual(model: LinearModel, records, sample_size=3000, seed=0):
    """Predict each sampled non-HK boat as listed and relabeled to Hong Kong.

    Returns (rows, grouped) where ``grouped`` maps hull type to its rows. The
    relabeled prediction differs only in the region dummies, so each delta is
    the HK coefficient minus the original region's coefficient.
    """
    sample = sample_non_hk(records, sample_size, seed)
    if not sample:
        return [], {Hull.MONOHULL: [], Hull.CATAMARAN: []}
    original = predict(model, _model_design(model, sample))
    relabeled = [replace(r, region=Region.HONG_KONG) for r in sample]
    hk = predict(model, _model_design(model, relabeled))
    rows = [CounterfactualRow(r.id, r.hull, r.region, float(po), float(ph))
            for r, po, ph in zip(sample, original, hk)]
    grouped = {h: [row for row in rows if row.hull is h] for h in (Hull.MONOHULL, Hull.CATAMARAN)}
    return rows, grouped


def summarize_by_hull(grouped):
    out = []
    for hull, rows in grouped.items():
        if not rows:
            out.append(HullSummary(hull, 0, math.nan, math.nan, math.nan))
            continue
        out.append(HullSummary(
            hull, len(rows),
            float(np.mean([r.pred_original for r in rows])),
            float(np.mean([r.pred_hk for r in rows])),
            float(np.mean([r.delta for r in rows])),
        ))
    return out

"""Domain records, feature schemas and the categorical encodings used by every model."""

from dataclasses import dataclass
from enum import Enum
import math
from typing import Optional, Sequence

import numpy as np

from .errors import MissingColumn, UnknownRegion, ZeroVarianceColumn, SchemaMismatch


class Hull(str, Enum):
    MONOHULL = "Monohull"
    CATAMARAN = "Catamaran"


class Region(str, Enum):
    CARIBBEAN = "Caribbean"
    EUROPE = "Europe"
    USA = "USA"
    HONG_KONG = "HongKong"


class RegionScheme(str, Enum):
    THREE_REGION = "ThreeRegion"
    FOUR_REGION_HK = "FourRegionHK"


SCHEME_LEVELS = {
    RegionScheme.THREE_REGION: (Region.CARIBBEAN, Region.EUROPE, Region.USA),
    RegionScheme.FOUR_REGION_HK: (Region.CARIBBEAN, Region.EUROPE, Region.USA, Region.HONG_KONG),
}
BASE_REGION = Region.CARIBBEAN

# Declared order of numeric regressors: length, year, waterline, beam, draft,
# displacement, sail area, then the optional GDP columns.
TECHNICAL_COLUMNS = (
    "length_ft",
    "year",
    "waterline_ft",
    "beam_ft",
    "draft_ft",
    "displacement_lb",
    "sail_area_sqft",
)
GDP_COLUMNS = ("gdp", "gdp_per_capita")
NUMERIC_COLUMNS = TECHNICAL_COLUMNS + GDP_COLUMNS
HULL = "hull"
REGION = "region"
# The eight regressors of the price model: seven measurements plus the hull indicator.
DEFAULT_FEATURES = TECHNICAL_COLUMNS + (HULL,)


@dataclass(frozen=True)
class SailboatRecord:
    id: str
    make_variant: str
    year: int
    length_ft: float
    beam_ft: float
    draft_ft: float
    displacement_lb: float
    sail_area_sqft: float
    waterline_ft: float
    hull: Hull
    region: Region
    listing_price: float
    gdp: Optional[float] = None
    gdp_per_capita: Optional[float] = None

    def __post_init__(self):
        for name in ("length_ft", "beam_ft", "draft_ft", "displacement_lb",
                     "sail_area_sqft", "waterline_ft", "listing_price"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        if not 1900 <= self.year <= 2025:
            raise ValueError(f"year {self.year} outside [1900, 2025]")
        if self.waterline_ft > self.length_ft:
            raise ValueError("waterline_ft cannot exceed length_ft")
        for name in GDP_COLUMNS:
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and non-negative")
        object.__setattr__(self, "hull", Hull(self.hull))
        object.__setattr__(self, "region", Region(self.region))


class ColumnKind(str, Enum):
    NUMERIC = "Numeric"
    ONE_HOT_GROUP = "OneHotGroup"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind = ColumnKind.NUMERIC
    group_levels: Optional[tuple] = None
    dropped_level: Optional[str] = None

    @property
    def kept_levels(self):
        if self.kind is ColumnKind.NUMERIC:
            return ()
        return tuple(lv for lv in self.group_levels if lv != self.dropped_level)

    @property
    def output_names(self):
        if self.kind is ColumnKind.NUMERIC:
            return (self.name,)
        return tuple(f"{self.name}_{lv}" for lv in self.kept_levels)


@dataclass(frozen=True)
class FeatureSchema:
    columns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column names in schema: {names}")

    @property
    def names(self):
        return tuple(n for c in self.columns for n in c.output_names)

    @property
    def width(self):
        return len(self.names)

    def numeric_names(self):
        return tuple(c.name for c in self.columns if c.kind is ColumnKind.NUMERIC)

    def group_slices(self):
        """(ColumnSpec, slice) for every one-hot group, in matrix coordinates."""
        out, start = [], 0
        for c in self.columns:
            width = len(c.output_names)
            if c.kind is ColumnKind.ONE_HOT_GROUP:
                out.append((c, slice(start, start + width)))
            start += width
        return out


@dataclass(frozen=True)
class StandardizationParams:
    """Per-column mean and population standard deviation of numeric columns."""

    columns: tuple
    means: tuple
    scales: tuple

    def _indices(self, schema):
        names = schema.names
        try:
            return [names.index(c) for c in self.columns]
        except ValueError as exc:
            raise SchemaMismatch(f"standardized column missing from schema: {exc}") from None

    def apply(self, rows, schema):
        out = np.array(rows, dtype=float, copy=True)
        idx = self._indices(schema)
        out[:, idx] = (out[:, idx] - np.asarray(self.means)) / np.asarray(self.scales)
        return out

    def invert(self, rows, schema):
        out = np.array(rows, dtype=float, copy=True)
        idx = self._indices(schema)
        out[:, idx] = out[:, idx] * np.asarray(self.scales) + np.asarray(self.means)
        return out


@dataclass(frozen=True)
class FeatureMatrix:
    """Numeric design matrix. ``standardization`` is set when ``rows`` are already scaled."""

    schema: FeatureSchema
    rows: np.ndarray
    row_ids: tuple
    standardization: Optional[StandardizationParams] = None

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(-1, self.schema.width) if self.schema.width else rows.reshape(-1, 0)
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        if rows.shape[0] != len(self.row_ids):
            raise ValueError("row count does not match row_ids")
        if rows.shape[1] != self.schema.width:
            raise ValueError(f"row width {rows.shape[1]} != schema width {self.schema.width}")

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def p(self):
        return self.rows.shape[1]

    def raw_rows(self):
        if self.standardization is None:
            return self.rows
        return self.standardization.invert(self.rows, self.schema)

    def subset(self, indices):
        idx = np.asarray(indices, dtype=int)
        return FeatureMatrix(self.schema, self.rows[idx], [self.row_ids[i] for i in idx],
                             self.standardization)


def encode_hull(hull):
    return 1.0 if Hull(hull) is Hull.CATAMARAN else 0.0


def decode_hull(value):
    if value == 1.0:
        return Hull.CATAMARAN
    if value == 0.0:
        return Hull.MONOHULL
    raise ValueError(f"hull indicator must be 0 or 1, got {value!r}")


def hull_column_spec():
    return ColumnSpec(HULL, ColumnKind.ONE_HOT_GROUP,
                      (Hull.MONOHULL.value, Hull.CATAMARAN.value), Hull.MONOHULL.value)


def region_column_spec(scheme, drop_base):
    levels = tuple(r.value for r in SCHEME_LEVELS[RegionScheme(scheme)])
    return ColumnSpec(REGION, ColumnKind.ONE_HOT_GROUP, levels,
                      BASE_REGION.value if drop_base else None)


def encode_regions(records, scheme, drop_base=False):
    """One-hot region codes in the fixed (Caribbean, Europe, USA[, HongKong]) order.

    Returns the group's ColumnSpec and an n x k array (k-1 columns with
    ``drop_base``, Caribbean being the reference level).
    """
    scheme = RegionScheme(scheme)
    levels = SCHEME_LEVELS[scheme]
    spec = region_column_spec(scheme, drop_base)
    kept = [Region(lv) for lv in spec.kept_levels]
    out = np.zeros((len(records), len(kept)))
    for i, rec in enumerate(records):
        if rec.region not in levels:
            raise UnknownRegion(f"record {rec.id}: region {rec.region.value} "
                                f"not representable under {scheme.value}")
        if rec.region in kept:
            out[i, kept.index(rec.region)] = 1.0
    return spec, out


def _numeric_value(rec, name):
    value = getattr(rec, name)
    if value is None:
        raise MissingColumn(f"column {name!r} missing for record {rec.id}")
    return float(value)


def build_design_matrix(records: Sequence[SailboatRecord], feature_selection=DEFAULT_FEATURES,
                        region_scheme=None, drop_base=True, standardize=False, params=None):
    """Assemble (FeatureMatrix, targets, StandardizationParams or None).

    Columns come out as the selected numeric columns in declared order, then
    the hull indicator, then the region group. With ``params`` given, those
    (training-set) statistics are applied instead of being estimated.
    """
    selection = set(feature_selection)
    unknown = selection - set(NUMERIC_COLUMNS) - {HULL}
    if unknown:
        raise MissingColumn(f"unknown feature columns: {sorted(unknown)}")
    numeric = [c for c in NUMERIC_COLUMNS if c in selection]
    specs = [ColumnSpec(c) for c in numeric]
    blocks = []
    if numeric:
        blocks.append(np.array([[_numeric_value(r, c) for c in numeric] for r in records],
                               dtype=float).reshape(len(records), len(numeric)))
    if HULL in selection:
        specs.append(hull_column_spec())
        blocks.append(np.array([[encode_hull(r.hull)] for r in records]).reshape(-1, 1))
    if region_scheme is not None:
        spec, block = encode_regions(records, region_scheme, drop_base)
        specs.append(spec)
        blocks.append(block)
    schema = FeatureSchema(tuple(specs))
    rows = np.hstack(blocks) if blocks else np.zeros((len(records), 0))
    y = np.array([r.listing_price for r in records], dtype=float)
    y.flags.writeable = False

    if params is None and standardize:
        raw = rows[:, :len(numeric)]
        means = raw.mean(axis=0)
        scales = raw.std(axis=0)
        for name, s in zip(numeric, scales):
            if not s > 0:
                raise ZeroVarianceColumn(f"column {name!r} is constant; cannot standardize")
        params = StandardizationParams(tuple(numeric), tuple(float(m) for m in means),
                                       tuple(float(s) for s in scales))
    if params is not None:
        rows = params.apply(rows, schema)
    X = FeatureMatrix(schema, rows, [r.id for r in records], params)
    return X, y, params

"""CSV loading with deletion-based cleaning, CSV writing, and the seeded synthetic generator."""

import csv
from dataclasses import dataclass, field
import math
from pathlib import Path
import re
from typing import Optional

from .core_data import (
    DEFAULT_FEATURES,
    Hull,
    Region,
    SailboatRecord,
    encode_hull,
)
from .errors import EmptyAfterCleaning, FileNotFound, HeaderMismatch
from .rng import XorShift64Star

CSV_COLUMNS = (
    "id", "make_variant", "year", "length_ft", "beam_ft", "draft_ft", "displacement_lb",
    "sail_area_sqft", "waterline_ft", "hull", "region", "gdp", "gdp_per_capita",
    "listing_price",
)
OPTIONAL_CSV_COLUMNS = ("gdp", "gdp_per_capita")
TECHNICAL_FIELDS = ("year", "length_ft", "beam_ft", "draft_ft", "displacement_lb",
                    "sail_area_sqft", "waterline_ft", "hull")

HULL_TOKENS = {"monohull": Hull.MONOHULL, "catamaran": Hull.CATAMARAN}
REGION_TOKENS = {
    "caribbean": Region.CARIBBEAN,
    "europe": Region.EUROPE,
    "usa": Region.USA,
    "hong_kong": Region.HONG_KONG,
}
HULL_TO_TOKEN = {v: k for k, v in HULL_TOKENS.items()}
REGION_TO_TOKEN = {v: k for k, v in REGION_TOKENS.items()}

# Plain decimal literals only: no currency symbols, separators, nan or inf.
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")


@dataclass
class CleaningReport:
    rows_in: int = 0
    dropped_missing_region: int = 0
    dropped_missing_technical: int = 0
    dropped_malformed: int = 0
    rows_out: int = 0

    @property
    def dropped(self):
        return self.dropped_missing_region + self.dropped_missing_technical + self.dropped_malformed

    def lines(self):
        return [
            f"rows_in={self.rows_in}",
            f"dropped_missing_region={self.dropped_missing_region}",
            f"dropped_missing_technical={self.dropped_missing_technical}",
            f"dropped_malformed={self.dropped_malformed}",
            f"rows_out={self.rows_out}",
        ]


class _Malformed(Exception):
    pass


def is_missing(cell):
    if cell is None:
        return True
    s = cell.strip()
    return s == "" or s.upper() == "NA"


def _number(cell):
    s = cell.strip()
    if not _NUMBER.match(s):
        raise _Malformed(s)
    value = float(s)
    if not math.isfinite(value):
        raise _Malformed(s)
    return value


def _integer(cell):
    s = cell.strip()
    if not _INTEGER.match(s):
        raise _Malformed(s)
    return int(s)


def _parse_row(row):
    try:
        hull = HULL_TOKENS[row["hull"].strip().lower()]
        region = REGION_TOKENS[row["region"].strip().lower()]
    except KeyError as exc:
        raise _Malformed(str(exc)) from None
    gdp = {}
    for name in OPTIONAL_CSV_COLUMNS:
        cell = row.get(name)
        gdp[name] = None if is_missing(cell) else _number(cell)
    try:
        return SailboatRecord(
            id=row["id"].strip(),
            make_variant=(row.get("make_variant") or "").strip(),
            year=_integer(row["year"]),
            length_ft=_number(row["length_ft"]),
            beam_ft=_number(row["beam_ft"]),
            draft_ft=_number(row["draft_ft"]),
            displacement_lb=_number(row["displacement_lb"]),
            sail_area_sqft=_number(row["sail_area_sqft"]),
            waterline_ft=_number(row["waterline_ft"]),
            hull=hull,
            region=region,
            listing_price=_number(row["listing_price"]),
            **gdp,
        )
    except ValueError as exc:
        raise _Malformed(str(exc)) from None


def load_csv(path):
    """Read listings, deleting incomplete rows; returns (records, CleaningReport).

    Rows with no region are counted first, then rows missing a technical
    field or the price, then rows whose cells do not parse or violate the
    record invariants. Nothing is imputed.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFound(f"input file not found: {path}")
    report = CleaningReport()
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        required = [c for c in CSV_COLUMNS if c not in OPTIONAL_CSV_COLUMNS]
        absent = [c for c in required if c not in header]
        if absent:
            raise HeaderMismatch(f"{path}: required columns absent: {', '.join(absent)}")
        reader.fieldnames = header
        for row in reader:
            report.rows_in += 1
            if is_missing(row.get("region")):
                report.dropped_missing_region += 1
                continue
            if any(is_missing(row.get(c)) for c in TECHNICAL_FIELDS + ("listing_price",)):
                report.dropped_missing_technical += 1
                continue
            if is_missing(row.get("id")):
                report.dropped_malformed += 1
                continue
            try:
                records.append(_parse_row(row))
            except _Malformed:
                report.dropped_malformed += 1
    report.rows_out = len(records)
    if not records:
        raise EmptyAfterCleaning(f"{path}: no rows left after cleaning ({report.rows_in} read)")
    return records, report


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_csv(records, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.id, r.make_variant, r.year, _fmt(r.length_ft), _fmt(r.beam_ft),
                _fmt(r.draft_ft), _fmt(r.displacement_lb), _fmt(r.sail_area_sqft),
                _fmt(r.waterline_ft), HULL_TO_TOKEN[r.hull], REGION_TO_TOKEN[r.region],
                _fmt(r.gdp), _fmt(r.gdp_per_capita), _fmt(r.listing_price),
            ])


# Generator feature set: the eight price regressors.
SYNTHETIC_FEATURES = DEFAULT_FEATURES


@dataclass
class SyntheticSpec:
    """Ground truth for generated listings.

    ``step_effect`` is an optional (column, threshold, amount) adding
    ``amount`` to the price whenever the column exceeds ``threshold``.
    """

    n_rows: int
    true_coefficients: dict = field(default_factory=dict)
    true_intercept: float = 0.0
    region_effects: dict = field(default_factory=dict)
    noise_std: float = 0.0
    seed: int = 0
    step_effect: Optional[tuple] = None
    catamaran_fraction: float = 0.2

    def __post_init__(self):
        if self.n_rows <= 0:
            raise ValueError("n_rows must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        unknown = set(self.true_coefficients) - set(SYNTHETIC_FEATURES)
        if unknown:
            raise ValueError(f"unknown synthetic columns: {sorted(unknown)}")
        self.region_effects = {Region(k): float(v) for k, v in self.region_effects.items()}
        if self.step_effect is not None and self.step_effect[0] not in SYNTHETIC_FEATURES:
            raise ValueError(f"unknown step column {self.step_effect[0]!r}")

    @property
    def regions(self):
        if not self.region_effects:
            return (Region.CARIBBEAN, Region.EUROPE, Region.USA)
        return tuple(r for r in Region if r in self.region_effects)


def synthetic_price(spec, features, region):
    """Noise-free price in a fixed accumulation order (intercept, features, region, step)."""
    price = spec.true_intercept
    for name in SYNTHETIC_FEATURES:
        coef = spec.true_coefficients.get(name)
        if coef:
            price += coef * features[name]
    price += spec.region_effects.get(region, 0.0)
    if spec.step_effect is not None:
        column, threshold, amount = spec.step_effect
        if features[column] > threshold:
            price += amount
    return price


def generate_synthetic(spec: SyntheticSpec):
    """Draw ``spec.n_rows`` listings from the seeded stream.

    Per row the draws are, in order: year (1980 + below(43)), length U(20, 80),
    beam U(8, 30), draft U(2, 12), displacement U(4000, 60000), sail area
    U(200, 3000), waterline ratio U(0.75, 0.95), hull uniform, region index,
    one Gaussian for noise. A row whose price comes out non-positive is
    redrawn.
    """
    rng = XorShift64Star(spec.seed)
    regions = spec.regions
    records = []
    for i in range(spec.n_rows):
        for _attempt in range(1000):
            year = 1980 + rng.below(43)
            length = rng.uniform(20.0, 80.0)
            beam = rng.uniform(8.0, 30.0)
            draft = rng.uniform(2.0, 12.0)
            displacement = rng.uniform(4000.0, 60000.0)
            sail_area = rng.uniform(200.0, 3000.0)
            waterline = length * rng.uniform(0.75, 0.95)
            hull = Hull.CATAMARAN if rng.uniform() < spec.catamaran_fraction else Hull.MONOHULL
            region = regions[rng.below(len(regions))]
            noise = rng.gauss(0.0, 1.0) * spec.noise_std
            features = {
                "length_ft": length, "year": float(year), "waterline_ft": waterline,
                "beam_ft": beam, "draft_ft": draft, "displacement_lb": displacement,
                "sail_area_sqft": sail_area, "hull": encode_hull(hull),
            }
            price = synthetic_price(spec, features, region) + noise
            if price > 0:
                break
        else:
            raise ValueError("synthetic spec keeps producing non-positive prices")
        records.append(SailboatRecord(
            id=f"syn-{i:06d}",
            make_variant=f"Synthetic {hull.value} {int(length)}",
            year=year, length_ft=length, beam_ft=beam, draft_ft=draft,
            displacement_lb=displacement, sail_area_sqft=sail_area, waterline_ft=waterline,
            hull=hull, region=region, listing_price=price,
        ))
    return records


def realistic_spec(n_rows, seed, noise_std=0.0, region_effects=None, step_effect=None):
    """A plausible price structure: bigger boats and catamarans cost more, deeper draft less."""
    return SyntheticSpec(
        n_rows=n_rows,
        true_coefficients={
            "length_ft": 4000.0,
            "year": 2500.0,
            "waterline_ft": 3000.0,
            "beam_ft": 6000.0,
            "draft_ft": -9000.0,
            "displacement_lb": 2.5,
            "sail_area_sqft": 40.0,
            "hull": 120000.0,
        },
        true_intercept=-4_900_000.0,
        region_effects=region_effects or {},
        noise_std=noise_std,
        seed=seed,
        step_effect=step_effect,
    )

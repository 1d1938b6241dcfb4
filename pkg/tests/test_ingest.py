import pytest

from sailprice.core_data import Hull, Region, build_design_matrix
from sailprice.errors import EmptyAfterCleaning, FileNotFound, HeaderMismatch
from sailprice.ingest import (
    CSV_COLUMNS,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    realistic_spec,
    write_csv,
)
from sailprice.linear_model import fit_ols

HEADER = ",".join(CSV_COLUMNS)
GOOD = "b1,Beneteau 40,2005,40,13,6,18000,900,35,monohull,europe,,,250000"


def _write(tmp_path, lines):
    path = tmp_path / "in.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_loads_good_row(tmp_path):
    records, report = load_csv(_write(tmp_path, [HEADER, GOOD]))
    (r,) = records
    assert (r.id, r.year, r.length_ft, r.hull, r.region, r.listing_price) == (
        "b1", 2005, 40.0, Hull.MONOHULL, Region.EUROPE, 250000.0)
    assert r.gdp is None
    assert report.rows_out == 1 and report.dropped == 0


def test_drop_categories(tmp_path):
    lines = [
        HEADER, GOOD,
        GOOD.replace("europe", "").replace("b1", "b2"),            # no region
        GOOD.replace(",40,13,", ",NA,13,").replace("b1", "b3"),    # technical missing
        GOOD.replace("250000", "").replace("b1", "b4"),            # price missing
        GOOD.replace("250000", "$250000").replace("b1", "b5"),     # malformed number
        GOOD.replace("monohull", "trimaran").replace("b1", "b6"),  # unknown hull token
        GOOD.replace("250000", "-5").replace("b1", "b7"),          # invariant: price > 0
        GOOD.replace(",2005,", ",2005.5,").replace("b1", "b8"),    # non-integer year
        GOOD.replace(",900,", ",inf,").replace("b1", "b9"),        # non-finite
    ]
    records, report = load_csv(_write(tmp_path, lines))
    assert [r.id for r in records] == ["b1"]
    assert (report.rows_in, report.dropped_missing_region, report.dropped_missing_technical,
            report.dropped_malformed, report.rows_out) == (9, 1, 2, 5, 1)
    assert report.lines()[0] == "rows_in=9"


def test_gdp_columns_optional(tmp_path):
    header = ",".join(c for c in CSV_COLUMNS if not c.startswith("gdp"))
    row = "b1,X,2005,40,13,6,18000,900,35,catamaran,hong_kong,250000"
    (r,), _ = load_csv(_write(tmp_path, [header, row]))
    assert r.hull is Hull.CATAMARAN and r.region is Region.HONG_KONG


def test_errors(tmp_path):
    with pytest.raises(FileNotFound):
        load_csv(tmp_path / "absent.csv")
    with pytest.raises(HeaderMismatch):
        load_csv(_write(tmp_path, ["id,year", "a,2000"]))
    with pytest.raises(EmptyAfterCleaning):
        load_csv(_write(tmp_path, [HEADER, GOOD.replace("europe", "")]))


def test_round_trip_is_exact(tmp_path, noise_free_records):
    path = tmp_path / "out.csv"
    write_csv(noise_free_records, path)
    back, report = load_csv(path)
    assert back == noise_free_records and report.dropped == 0
    write_csv(back, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_synthetic_deterministic_and_seed_sensitive():
    spec = realistic_spec(50, seed=3, noise_std=1000.0)
    assert generate_synthetic(spec) == generate_synthetic(spec)
    assert generate_synthetic(spec) != generate_synthetic(realistic_spec(50, seed=4, noise_std=1000.0))


def test_synthetic_prices_follow_the_plane():
    spec = realistic_spec(200, seed=1)
    records = generate_synthetic(spec)
    assert all(r.listing_price > 0 for r in records)
    assert all(r.waterline_ft <= r.length_ft for r in records)
    X, y, _ = build_design_matrix(records)
    m = fit_ols(X, y)
    for name, value in spec.true_coefficients.items():
        col = "hull_Catamaran" if name == "hull" else name
        assert m.coefficients[col] == pytest.approx(value, rel=1e-6)


def test_step_effect_applied():
    base = SyntheticSpec(40, {"length_ft": 1000.0}, 10.0, seed=2)
    step = SyntheticSpec(40, {"length_ft": 1000.0}, 10.0, seed=2, step_effect=("length_ft", 50.0, 7.0))
    for a, b in zip(generate_synthetic(base), generate_synthetic(step)):
        assert b.listing_price - a.listing_price == (7.0 if a.length_ft > 50.0 else 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(0)
    with pytest.raises(ValueError):
        SyntheticSpec(10, {"mast_height": 1.0})
    with pytest.raises(ValueError):
        SyntheticSpec(10, noise_std=-1.0)

import numpy as np
import pytest

from sailprice.core_data import Hull, Region, SailboatRecord
from sailprice.ingest import generate_synthetic, realistic_spec

PLANTED_REGION_EFFECTS = {
    Region.CARIBBEAN: 0.0,
    Region.EUROPE: 17809.42,
    Region.USA: 117553.40,
    Region.HONG_KONG: 16804.39,
}


def make_record(id="r1", region=Region.CARIBBEAN, hull=Hull.MONOHULL, price=100000.0, **kw):
    fields = dict(make_variant="Test 40", year=2000, length_ft=40.0, beam_ft=12.0, draft_ft=6.0,
                  displacement_lb=20000.0, sail_area_sqft=800.0, waterline_ft=34.0)
    fields.update(kw)
    return SailboatRecord(id=id, hull=hull, region=region, listing_price=price, **fields)


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture(scope="session")
def noise_free_records():
    return generate_synthetic(realistic_spec(300, seed=5))


@pytest.fixture(scope="session")
def four_region_records():
    return generate_synthetic(realistic_spec(800, seed=9, region_effects=PLANTED_REGION_EFFECTS))


def matrix(rows, names=None):
    """FeatureMatrix of plain numeric columns from an array."""
    from sailprice.core_data import ColumnSpec, FeatureMatrix, FeatureSchema

    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    names = names or [f"x{j}" for j in range(rows.shape[1])]
    schema = FeatureSchema(tuple(ColumnSpec(n) for n in names))
    return FeatureMatrix(schema, rows, [str(i) for i in range(rows.shape[0])])

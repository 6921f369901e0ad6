import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cyclone_ri.besttrack import Basin, Cyclone, TrackPoint, load_basin, split_by_period  # noqa: E402
from cyclone_ri.fixtures import fixture_dir  # noqa: E402

T0 = datetime(1995, 2, 1, tzinfo=timezone.utc)


def make_cyclone(winds, cid="SH011995", start=T0, lat0=-12.0, lon0=170.0, dlat=-0.3, dlon=-0.4):
    pts = tuple(
        TrackPoint(start + timedelta(hours=6 * k), round(lat0 + dlat * k, 1), round((lon0 + dlon * k) % 360, 1), int(w))
        for k, w in enumerate(winds)
    )
    return Cyclone(cid, pts)


@pytest.fixture
def cyclone_factory():
    return make_cyclone


@pytest.fixture(scope="session")
def si_split():
    ds, _ = load_basin(fixture_dir(), Basin.SOUTH_INDIAN)
    return split_by_period(ds)


@pytest.fixture(scope="session")
def sp_dataset():
    ds, report = load_basin(fixture_dir(), Basin.SOUTH_PACIFIC)
    return ds, report


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

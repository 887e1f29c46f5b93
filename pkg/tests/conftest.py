import json
from pathlib import Path

import pytest

from cloudplan.cost_model import PriceBook, default_price_book

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"


def load_fixture_prices(name: str) -> PriceBook:
    with open(FIXTURES / name, "r", encoding="utf-8") as fh:
        return PriceBook.from_json(json.load(fh))


@pytest.fixture
def default_prices() -> PriceBook:
    return default_price_book()


@pytest.fixture
def worked_example_prices() -> PriceBook:
    return load_fixture_prices("prices_worked_examples.json")


@pytest.fixture
def intra_prices() -> PriceBook:
    return load_fixture_prices("prices_intra_gcp.json")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES

import pytest

from activepool import RngStream


@pytest.fixture
def rng():
    return RngStream(1234, "fixture")

import pytest

from liqinfer.metatheory import default_qualifiers
from liqinfer.validity import ValidityEngine


@pytest.fixture(scope="session")
def engine():
    return ValidityEngine()


@pytest.fixture(scope="session")
def sign_qualifiers():
    return default_qualifiers()

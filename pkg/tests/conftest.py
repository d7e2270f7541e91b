import pytest

from selfsim.corpus import get_entry


@pytest.fixture(scope="session")
def bisection():
    return get_entry("bisection").ifs


@pytest.fixture(scope="session")
def cantor():
    return get_entry("cantor").ifs


@pytest.fixture(scope="session")
def gasket():
    return get_entry("gasket").ifs


@pytest.fixture(scope="session")
def squares():
    return get_entry("squares").ifs


@pytest.fixture(scope="session")
def duplicate_cantor():
    return get_entry("duplicate_cantor").ifs


@pytest.fixture(scope="session")
def mattila():
    return get_entry("mattila").ifs

import pytest

from queriability.harness import load_bundle


@pytest.fixture(scope="session")
def bundle():
    return load_bundle()


@pytest.fixture(scope="session")
def ma(bundle):
    return bundle.approaches

import pytest

import genfun as gf

KINDS = ("bump", "cosine_power", "truncated_gaussian")


@pytest.fixture(scope="session")
def mollifiers():
    return {kind: gf.make_mollifier(kind) for kind in KINDS}


@pytest.fixture(scope="session")
def bump(mollifiers):
    return mollifiers["bump"]


@pytest.fixture(scope="session")
def grid():
    return gf.EpsilonGrid()


@pytest.fixture(scope="session")
def suite():
    return gf.standard_test_suite(6, 1)

import pytest

from occucert import catalog
from occucert.model import make_spec


@pytest.fixture
def ex1():
    return catalog.example1_spec()


@pytest.fixture
def ex2():
    return catalog.example2_spec()


@pytest.fixture
def toy():
    # single mode x + 0.5 on [0, 1]; target near the upper edge
    return make_spec([([0.5, 1.0], 1.0)], [(0.0, 1.0)], [(0.9, 1.0)], 0.8)


@pytest.fixture
def leaky():
    # expanding dynamics so that many paths leave the safe set
    return make_spec([([-0.3, 1.5], 0.5), ([0.3, 1.5], 0.5)], [(-1.0, 1.0)], [(-0.2, 0.2)], 0.0)

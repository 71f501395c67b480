import numpy as np
import pytest

from c3geom.geometry import CASES


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture(params=sorted(CASES))
def case(request):
    return CASES[request.param]

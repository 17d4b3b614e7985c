import numpy as np
import pytest

from CIR_rates.cir import make_params
from CIR_rates.substitution import build_rate_matrix


@pytest.fixture
def p111():
    return make_params(1, 1, 1)


@pytest.fixture
def jc():
    return build_rate_matrix('JC')


@pytest.fixture
def hky():
    return build_rate_matrix('HKY', {'kappa': 3.0}, [0.1, 0.2, 0.3, 0.4])


@pytest.fixture
def rng():
    return np.random.default_rng(20201227)

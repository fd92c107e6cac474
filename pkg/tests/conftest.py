import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning

from thermocarleman.medium import bundle, make_medium

warnings.simplefilter("ignore", IntegrationWarning)

MEDIUM_ARGS = (1.3, 0.9, 1.1, 1.2, 0.7, 0.5, 0.8)


@pytest.fixture(scope="session")
def mb():
    return bundle(make_medium(*MEDIUM_ARGS))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

import os
import sys

import pytest

from quintic_moduli import PrecisionContext

sys.path.insert(0, os.path.dirname(__file__))  # for oracle_values


@pytest.fixture(scope="session")
def ctx512():
    return PrecisionContext(precision_bits=512, tol_exp=120)


@pytest.fixture(scope="session")
def ctx1024():
    return PrecisionContext(precision_bits=1024, tol_exp=120)

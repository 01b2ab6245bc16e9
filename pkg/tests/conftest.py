import os
import sys

import numpy as np
import pytest

# Add project root to Python path
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, PROJECT_ROOT)

from src.families.exp_poly import ExpPolyParams  # noqa: E402
from src.series.jet import Tolerance  # noqa: E402

FIXTURES_DIR = os.path.join(PROJECT_ROOT, 'fixtures')


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def tol():
    return Tolerance()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def exp_minus_linear():
    """e^z - 1 - z as P_1 = 1, Q_1 = z; P_2 = -1 - z, Q_2 = 0"""
    return ExpPolyParams.from_polynomials([[1, 0], [-1, -1]], [[1], [0]])


@pytest.fixture
def center_pair():
    """P_1 = -P_2 = 1, Q_1 = Q_2 = z: f vanishes identically"""
    return ExpPolyParams.from_polynomials([[1], [-1]], [[1], [1]])

"""
Shared fixtures for the test suite.
"""
import sys
from pathlib import Path
import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from mesh2d import gen_disk_domain, gen_square_domain  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def disk_mesh():
    """Coarse unit disk with 64 boundary vertices."""
    return gen_disk_domain(1.0, 64, 0.15)


@pytest.fixture(scope="session")
def square_mesh():
    """Unit square with sides labelled 1 (bottom) to 4 (left)."""
    return gen_square_domain(1.0, 0.125)

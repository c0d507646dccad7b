import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT))

from core.linalg import ChaosCoefficients  # noqa: E402
from ustat import DiscreteDistribution, random_degenerate_kernel  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs a verification suite end to end")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def rademacher():
    return DiscreteDistribution.rademacher()


@pytest.fixture
def degenerate_kernel(rng):
    """(H, P) with n = 3, d = 2 on a 2-point law"""
    return random_degenerate_kernel(3, 2, 2, rng)


def symmetric_coefficients(rng, n, d):
    """Index-symmetric real coefficients with zero diagonal"""
    base = rng.standard_normal((n, n, d, d))
    base = 0.5 * (base + np.swapaxes(base, -1, -2))
    base = 0.5 * (base + base.transpose(1, 0, 2, 3))
    base[np.arange(n), np.arange(n)] = 0.0
    return ChaosCoefficients(base)


@pytest.fixture
def coefficients(rng):
    return symmetric_coefficients(rng, 3, 2)

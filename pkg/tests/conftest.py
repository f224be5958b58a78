import numpy as np
import pytest

from urllc_sched import table1
from urllc_sched.harness import tiny_config


@pytest.fixture(scope="session")
def table1_config():
    return table1()


@pytest.fixture(scope="session")
def small_config():
    """Fast K=2, M=2, N=2 instance used by unit tests."""
    return tiny_config()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

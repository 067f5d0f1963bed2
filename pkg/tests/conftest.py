import numpy as np
import pytest
from hypothesis import settings

from forced_burgers import HamiltonianSpec, LaxOleinikConfig

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture
def free():
    return HamiltonianSpec.free()


@pytest.fixture
def pendulum():
    return HamiltonianSpec.pendulum()


@pytest.fixture
def forced():
    return HamiltonianSpec.forced_pendulum()


@pytest.fixture
def small_cfg():
    return LaxOleinikConfig(n=128, m=16, v_max=2.0)


@pytest.fixture
def cfg():
    return LaxOleinikConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

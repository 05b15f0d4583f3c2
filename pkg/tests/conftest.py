from pathlib import Path

import pytest

from magnon import experiments as ex

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


@pytest.fixture(scope="session")
def fig1a():
    return ex.run_figure("1a")


@pytest.fixture(scope="session")
def fig1b():
    return ex.run_figure("1b")


@pytest.fixture(scope="session")
def fig2():
    return ex.run_figure("2")


@pytest.fixture(scope="session")
def fig3():
    return ex.run_figure("3")

import numpy as np
import pytest

from panelband.curves import PanelSeries, make_grid


def pytest_addoption(parser):
    parser.addoption("--quick", action="store_true", help="skip slow Monte Carlo checks")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--quick"):
        return
    skip = pytest.mark.skip(reason="--quick")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_panel(rng):
    grid = make_grid(21)
    return PanelSeries(rng.standard_normal((40, 3, 21)), grid)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from singhartree import FRIEDRICHS, RadialGrid, build_transform
from singhartree.sampling import philox_rng


@pytest.fixture(scope="session")
def grid512():
    return RadialGrid(12.0, 512)


@pytest.fixture(scope="session")
def grid1024():
    return RadialGrid(12.0, 1024)


@pytest.fixture(scope="session")
def transforms(grid512):
    """Transforms on the standard grid for the four reference couplings."""
    return {a: build_transform(grid512, a) for a in (0.0, 0.1, 1.0, FRIEDRICHS)}


@pytest.fixture(scope="session")
def transform1024(grid1024):
    return build_transform(grid1024, 1.0)


@pytest.fixture()
def rng():
    return philox_rng(987654321)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from arwave import lattice  # noqa: E402


@pytest.fixture(scope="session")
def members_1e4():
    return [m for m in range(1, 10**4 + 1) if lattice.is_sum_of_two_squares(m)]


@pytest.fixture(scope="session")
def levels_1e4():
    return list(lattice.levels_upto(10**4))

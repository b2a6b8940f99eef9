import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from llrp import Instance, random_instance  # noqa: E402


@pytest.fixture
def line_instance():
    """One depot at the origin, customers on the x axis at 5 and 8."""
    return Instance("line", [[0, 0]], [[5, 0], [8, 0]], [1, 1], 10, 1, 1)


@pytest.fixture
def small_instance():
    return random_instance(7, 10, 3, n_vehicles=3, max_open_depots=2)


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from jsgpr.instance import SamplingParams, make_instance
from jsgpr.topology import bundled_topologies, load_graphml, make_topology


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square():
    """Four nodes on a small square with one diagonal, 100 Mbps links."""
    coords = {"a": (45.0, 10.0), "b": (45.0, 11.0), "c": (46.0, 11.0), "d": (46.0, 10.0)}
    return make_topology(coords, [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")], name="square")


@pytest.fixture
def square_instance(square):
    return make_instance(square, SamplingParams(seed=3))


@pytest.fixture(scope="session")
def zoo():
    return {name: load_graphml(path) for name, path in bundled_topologies().items()}


@pytest.fixture(scope="session")
def ans(zoo):
    return zoo["Ans"]


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])

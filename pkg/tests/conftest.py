import math

import numpy as np
import pytest
from hypothesis import strategies as st

from bellbound.correlation import CorrelationFunction
from bellbound.models import bell_correlation_exact
from bellbound.quantum import Direction


def _unit(v):
    v = np.asarray(v, dtype=float)
    return Direction.from_vector(v / np.linalg.norm(v))


unit_vectors = (
    st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3)
    .filter(lambda v: math.hypot(*v) > 1e-3)
    .map(_unit)
)


def random_directions(rng, n):
    v = rng.normal(size=(n, 3))
    return [_unit(x) for x in v]


@pytest.fixture
def triangle():
    return CorrelationFunction.from_function(bell_correlation_exact, 4096, label="triangle")


@pytest.fixture
def cosine():
    return CorrelationFunction.from_function(np.cos, 4096, label="cos")


ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; call the returned function with (passed, detail)."""
    number, title = request.node.get_closest_marker("criterion").args

    def record(passed, detail=""):
        ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)
        return passed

    ACCEPTANCE_RESULTS[number] = (title, False, "did not complete")
    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")

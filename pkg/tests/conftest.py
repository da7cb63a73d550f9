import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from svcalc.set_core import CompactSet

settings.register_profile("svcalc", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("svcalc")

# Coordinates on a dyadic grid: squared distances are exact in floating point,
# so ties are exact ties and distinct distances are far apart.
GRID = st.integers(-80, 80).map(lambda k: k / 8.0)


@st.composite
def point_clouds(draw, dim=None, max_size=30, count=1):
    n = draw(st.integers(1, 3)) if dim is None else dim
    out = []
    for _ in range(count):
        size = draw(st.integers(1, max_size))
        rows = draw(st.lists(st.lists(GRID, min_size=n, max_size=n), min_size=size, max_size=size))
        out.append(CompactSet(rows))
    return out[0] if count == 1 else tuple(out)


def random_cloud(rng: np.random.Generator, n: int, size: int | None = None, scale: float = 10.0) -> CompactSet:
    size = int(rng.integers(1, 31)) if size is None else size
    return CompactSet(rng.uniform(-scale, scale, size=(size, n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def assert_set_close(A: CompactSet, expected, atol=1e-12):
    B = CompactSet(expected)
    assert len(A) == len(B), f"{A.tolist()} vs {B.tolist()}"
    np.testing.assert_allclose(A.points, B.points, atol=atol, rtol=0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT_LINES:
            terminalreporter.write_line(line)

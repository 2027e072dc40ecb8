import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gls.measure import MeasurePartition, SimpleFunction

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def simple_functions(draw, min_atoms=1, max_atoms=12, unit_mass=True, nonzero=False, atoms=None):
    k = atoms if atoms is not None else draw(st.integers(min_atoms, max_atoms))
    raw = draw(st.lists(st.floats(1e-3, 1.0), min_size=k, max_size=k))
    w = np.array(raw)
    if unit_mass:
        w = w / w.sum()
    v = np.array(draw(st.lists(finite, min_size=k, max_size=k)))
    if nonzero and not np.any(v):
        v[0] = 1.0
    return SimpleFunction(MeasurePartition(w), v)


@st.composite
def function_pairs(draw, max_atoms=12):
    f = draw(simple_functions(max_atoms=max_atoms))
    g_vals = draw(st.lists(finite, min_size=len(f.values), max_size=len(f.values)))
    return f, SimpleFunction(f.partition, g_vals)


@pytest.fixture
def acceptance_log(request):
    log = getattr(request.config, "_acceptance_lines", None)
    if log is None:
        log = request.config._acceptance_lines = []
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

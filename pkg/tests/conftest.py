"""Shared hypothesis strategies and settings."""

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)


def vectors(n, elements=finite):
    return st.lists(elements, min_size=n, max_size=n).map(np.array)


@st.composite
def generator_sets(draw, n=None, max_gens=5):
    n = n or draw(st.integers(1, 4))
    k = draw(st.integers(1, max_gens))
    rows = draw(st.lists(vectors(n), min_size=k, max_size=k))
    return np.array(rows)


@st.composite
def unit_vectors(draw, n):
    v = draw(vectors(n, st.floats(-1.0, 1.0, allow_nan=False)))
    if np.linalg.norm(v) < 1e-3:
        v = np.ones(n)
    return v / np.linalg.norm(v)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


# one PASS/FAIL line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

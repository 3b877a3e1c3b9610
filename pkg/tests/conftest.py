"""Shared fixtures: session-cached tables and deterministic RNG."""

import numpy as np
import pytest

# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from boxqi import boxspline, geometry, stencils


@pytest.fixture(scope="session")
def table():
    """The exact Bernstein coefficient table of the seven-direction box
    spline (built once; ~1 s)."""
    return boxspline.get_table()


@pytest.fixture(scope="session")
def lib():
    return stencils.library()


@pytest.fixture(scope="session")
def grid11():
    return geometry.DomainGrid(11, 11, 11, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260825)

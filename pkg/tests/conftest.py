from functools import lru_cache

import numpy as np
import pytest

from phaseode import problems, solver
from phaseode.checks import const_spec


@lru_cache(maxsize=None)
def built(pid, log2_omega):
    """Fundamental matrix of a registered problem with default options (cached)."""
    return solver.build(problems.get(pid).solver_input(2.0 ** log2_omega))


@pytest.fixture(scope="session")
def build_problem():
    return built


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def rotation_spec():
    """``y' = diag(i, -i) y`` on [-1, 1]."""
    return const_spec(np.diag([1j, -1j]))


ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Record ``(criterion, passed, text)``; parts of one criterion are combined."""

    def record(criterion, passed, text):
        prev = ACCEPTANCE_LINES.get(criterion)
        if prev is not None:
            passed = passed and prev[0]
            text = prev[1] + "; " + text
        ACCEPTANCE_LINES[criterion] = (passed, text)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_LINES):
        passed, text = ACCEPTANCE_LINES[crit]
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if passed else 'FAIL'}  {text}")

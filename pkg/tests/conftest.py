import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from atdm import sim  # noqa: E402

_RUNS = {}


def default_run(condition):
    """Default scenario results, computed once per session: (atdm, serial, seconds)."""
    if condition not in _RUNS:
        start = time.perf_counter()
        atdm, serial = sim.run_scenario(sim.ScenarioConfig(condition=condition))
        _RUNS[condition] = (atdm, serial, time.perf_counter() - start)
    return _RUNS[condition]


@pytest.fixture(scope="session")
def runs():
    return default_run


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion (echoed in the terminal summary)."""
    def emit(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE, key=lambda item: item[0]):
        terminalreporter.write_line(line)

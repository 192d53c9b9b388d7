import sys

import pytest

from imr.declare import rule
from imr.log import EventLog


@pytest.fixture
def L1():
    return EventLog({("a", "c", "d"): 1, ("b", "c", "e"): 1})


@pytest.fixture
def L2():
    return EventLog({("c", "a", "c", "b", "c"): 1})


@pytest.fixture
def L5():
    return EventLog({("a", "c", "b"): 50, ("d", "c"): 50})


@pytest.fixture
def R1():
    return [rule("not-co-existence", "a", "e"), rule("not-co-existence", "b", "d")]


@pytest.fixture
def R2():
    return [rule("response", "a", "b")]


@pytest.fixture
def R3():
    return [rule("precedence", "a", "b")]


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        passed, detail = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")

import pytest

from proofpfd.model import TestPolicy, TestSchedule, periodic_schedule, validate_system

HOURS_PER_MONTH = 730.0
CASE_LAMBDA = 6.1e-5
CASE_E = 0.42
CASE_TAU = 8760.0
# Known optimized case-study policy, in months
OPTIMIZED_MONTHS = (4.8, 7.8, 10.1, 12.0)


@pytest.fixture
def case_system():
    return validate_system(2, 6, CASE_LAMBDA)


@pytest.fixture
def basic_policy():
    return TestPolicy(periodic_schedule(4, CASE_TAU), CASE_E)


@pytest.fixture
def optimized_policy():
    return TestPolicy(TestSchedule([t * HOURS_PER_MONTH for t in OPTIMIZED_MONTHS]), CASE_E)


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, title, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")

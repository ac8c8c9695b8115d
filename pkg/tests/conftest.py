import numpy as np
import pytest

_acceptance: list[tuple[str, str, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance.append((name, "PASS" if report.passed else "FAIL", report.nodeid))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, _ in _acceptance:
        terminalreporter.write_line(f"{status}  {name}")

"""Shared test plumbing: per-guarantee verdict lines for the acceptance run."""

import pytest

_DETAILS = {}
_OUTCOMES = {}


@pytest.fixture
def verdict(request):
    """Record a measured-numbers note to show next to this test's verdict."""

    def _record(message: str) -> None:
        _DETAILS[request.node.nodeid] = message

    return _record


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance verdicts")
    for nodeid, outcome in _OUTCOMES.items():
        name = nodeid.split("::")[-1]
        status = "PASS" if outcome == "passed" else "FAIL"
        detail = _DETAILS.get(nodeid)
        line = f"{status} {name}"
        if detail:
            line += f" - {detail}"
        terminalreporter.write_line(line)

"""Shared pytest plumbing.

Collects acceptance-test outcomes and prints one PASS/FAIL line per
criterion in the terminal summary, so the gate is readable at a glance.
"""

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    if report.when == "call":
        _acceptance[name] = "PASS" if report.passed else "FAIL"
    elif report.failed:  # setup/teardown error
        _acceptance[name] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]}: {name}")

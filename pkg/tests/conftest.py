"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS = {}
_TITLES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    _TITLES[number] = title
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        _RESULTS[number] = _RESULTS.get(number, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status = "PASS" if _RESULTS[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {_TITLES[number]}")

"""Collects the outcome of every acceptance criterion and prints one line each."""

import pytest

_CRITERIA: dict[str, list[str]] = {}
_TITLES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            number, title = mark.args
            _TITLES[str(number)] = title
            _CRITERIA.setdefault(str(number), [])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if not mark:
        return
    key = str(mark.args[0])
    if report.when == "call" or report.failed:
        _CRITERIA[key].append("passed" if report.passed else "failed" if report.failed else "skipped")


def _sort_key(key):
    digits = "".join(ch for ch in key if ch.isdigit())
    return (int(digits) if digits else 0, key)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=_sort_key):
        results = _CRITERIA[key]
        if not results:
            status = "NOT RUN"
        elif "failed" in results:
            status = "FAIL"
        elif "passed" in results:
            status = "PASS"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"criterion {key:>3}: {status:<7} {_TITLES[key]}")

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_CRITERIA = {}
_DETAILS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number_title = _MARKS.get(report.nodeid)
    if number_title is None:
        return
    ok = report.outcome == "passed"
    prev = _CRITERIA.get(number_title, True)
    _CRITERIA[number_title] = prev and ok


_MARKS = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _MARKS[item.nodeid] = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
        for line in _DETAILS.get(number, []):
            terminalreporter.write_line(f"    {line}")


@pytest.fixture
def measured(request):
    """Record measured values for the acceptance summary of the current criterion."""
    mark = request.node.get_closest_marker("criterion")
    number = mark.args[0] if mark else None

    def record(text):
        print(text)
        _DETAILS.setdefault(number, []).append(text)
    return record


@pytest.fixture
def cli_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path

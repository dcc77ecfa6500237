import re

import pytest

# criterion number -> list of (nodeid, passed)
_CRITERIA: dict[int, list[tuple[str, bool]]] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n, title = mark.args
            _TITLES[n] = title
            _CRITERIA.setdefault(n, [])


def pytest_runtest_logreport(report):
    m = re.search(r"test_c(\d+)_", report.nodeid)
    if m is None or "test_acceptance" not in report.nodeid:
        return
    failed = report.failed
    if report.when == "call" or failed:
        _CRITERIA.setdefault(int(m.group(1)), []).append((report.nodeid, not failed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _CRITERIA[n]
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(ok for _, ok in results) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status:7s} {_TITLES.get(n, '')} ({len(results)} tests)")


@pytest.fixture(scope="session")
def rng():
    import numpy as np

    return np.random.default_rng(12345)

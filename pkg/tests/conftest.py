import numpy as np
import pytest

from reebsym.mesh import make_icosphere
from reebsym.tree import worked_path_example


@pytest.fixture(scope="session")
def icospheres():
    cache = {}

    def get(level):
        if level not in cache:
            cache[level] = make_icosphere(level)
        return cache[level]

    return get


@pytest.fixture
def path_example():
    return worked_path_example()


@pytest.fixture
def zgrid():
    return np.linspace(-0.5, 0.5, 2001)


_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    status = "PASS" if report.passed else "FAIL"
    if _CRITERIA.get(number, ("", "PASS"))[1] == "PASS":
        _CRITERIA[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")

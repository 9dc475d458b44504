import math
from collections import OrderedDict

import pytest

from distpnr.materials import NBTIN, VACUUM, Material, MeanderSpec

LAMBDA = 1550.0

_criteria: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _criteria.setdefault(number, {"title": title, "outcomes": []})


def pytest_runtest_logreport(report):
    mark_info = getattr(report, "criterion", None)
    if mark_info is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[mark_info]["outcomes"].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, info in sorted(_criteria.items()):
        outcomes = info["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status:7s} {info['title']}")


@pytest.fixture
def half_fill():
    return MeanderSpec(NBTIN, VACUUM, 0.5)


@pytest.fixture
def spacer_slit():
    return Material.constant("spacer", 2.25)


def phase_diff(a: complex, b: complex) -> float:
    """Signed difference arg(a) - arg(b) wrapped into (-pi, pi]."""
    d = math.atan2(a.imag, a.real) - math.atan2(b.imag, b.real)
    return math.remainder(d, 2 * math.pi)

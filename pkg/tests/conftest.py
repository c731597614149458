import numpy as np
import pytest

from semaxis.synthetic import make_model

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")
    config.addinivalue_line("markers", "fullscale: needs external downloads; enabled by SEMAXIS_FULLSCALE=1")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "failed": False, "skipped": False, "ran": False})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry["ran"] = True
        if rep.failed:
            entry["failed"] = True
        elif rep.skipped:
            entry["skipped"] = True


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "FAIL" if e["failed"] else "SKIP" if e["skipped"] else "PASS"
        terminalreporter.write_line(f"{status}  criterion {n:>2}: {e['title']}")


@pytest.fixture
def abc_model():
    return make_model(["a", "b", "c"], [[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

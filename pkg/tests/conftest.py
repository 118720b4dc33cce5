import os

import pytest
from hypothesis import HealthCheck, settings

from uncertainty_lab.corpus import CORPUS_GRID, PRODUCT_GRID, corpus, product_corpus

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def preps():
    return corpus(CORPUS_GRID)


@pytest.fixture(scope="session")
def products():
    return product_corpus(PRODUCT_GRID)


# -- acceptance summary ---------------------------------------------------------------
# Tests marked @pytest.mark.criterion(n, title) report one PASS/FAIL line each at the end
# of the run, whatever the capture mode.

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    if rep.failed or rep.when == "call":
        status = "PASS" if rep.passed else "FAIL"
        _CRITERIA[n] = (status, title, f"{call.duration:.2f}s")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, took = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}  ({took})")

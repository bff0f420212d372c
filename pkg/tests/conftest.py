from __future__ import annotations

import pytest

from rmcda.cli.io import load_matrix
from rmcda.cli.pipeline import bundled_fixture
from rmcda.core import DecisionMatrix
from rmcda.normalize import normalize_vector
from rmcda.robustness import PerturbationConfig, stability_sweep

_OUTCOMES: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_acceptance", None)
    if marker is None:
        return
    number, title = marker
    entry = _OUTCOMES.setdefault(number, {"title": title, "passed": True, "ran": False})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["ran"] = True
        if report.outcome != "passed":
            entry["passed"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result()._acceptance = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        entry = _OUTCOMES[number]
        status = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {entry['title']}")


@pytest.fixture(scope="session")
def fixture_matrix() -> DecisionMatrix:
    return load_matrix(bundled_fixture())


@pytest.fixture(scope="session")
def fixture_vector(fixture_matrix):
    return normalize_vector(fixture_matrix)


@pytest.fixture(scope="session")
def default_report(fixture_matrix):
    """The full default sweep, computed once per session."""
    return stability_sweep(fixture_matrix, cfg=PerturbationConfig())



@pytest.fixture(scope="session")
def gm_weights(fixture_vector):
    """Geometric mean of the SD, COV and MEREC weights of the fixture."""
    from rmcda.aggregation import aggregate_gm
    from rmcda.weighting import weights_cov, weights_merec, weights_sd

    return aggregate_gm([f(fixture_vector) for f in (weights_sd, weights_cov, weights_merec)])

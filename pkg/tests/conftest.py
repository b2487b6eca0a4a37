import numpy as np
import pytest

from riskal import default_prior, default_transition_model, default_utility_model

_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def tm():
    return default_transition_model()


@pytest.fixture
def um():
    return default_utility_model()


@pytest.fixture
def prior():
    return default_prior(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        outcome = _ACCEPTANCE_RESULTS[name]
        mark = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{mark}: {name}")

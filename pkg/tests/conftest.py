import pytest

from encbel.cli import fixture_paths
from encbel.conditional import ConditionalBeliefFamily
from encbel.frame import Variable
from encbel.io import load_network
from encbel.massfn import FULL

_acceptance: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.outcome == "passed" else "FAIL"
        prev = _acceptance.get(n)
        if prev is not None:
            # several tests share one criterion: keep the common heading, any FAIL wins
            title = title.split(":")[0]
            status = status if prev[1] == "PASS" else prev[1]
        _acceptance[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        title, status = _acceptance[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")


@pytest.fixture
def ab_vars():
    return Variable("A", ("a", "~a"), order=0), Variable("B", ("b", "~b"), order=1)


@pytest.fixture
def rule_family(ab_vars):
    a, b = ab_vars
    return ConditionalBeliefFamily.from_labels(a, b, {"a": {"b": 0.9, FULL: 0.1}, "~a": {FULL: 1.0}})


@pytest.fixture
def example3_paths():
    return fixture_paths()


@pytest.fixture
def example3(example3_paths):
    return load_network(*example3_paths)


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20240611)

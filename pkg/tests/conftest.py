import numpy as np
import pytest

from reprank.graph import Graph, build_transition


def random_graph(rng, n, density=None):
    """Erdos-Renyi style digraph; density drawn from [0, 0.5] when not given."""
    if density is None:
        density = rng.uniform(0.0, 0.5)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return Graph.from_arrays(src, dst, n)


def operators(graph):
    return build_transition(graph, "forward"), build_transition(graph, "backward")


def mixed_seeds(rng, n):
    """Seeds in {-1, 0, +1} with at least one of each sign when n allows."""
    d = rng.choice([-1.0, 0.0, 1.0], size=n)
    if n >= 2:
        d[0], d[1] = 1.0, -1.0
    return d


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.skipped and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], "skipped"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        tag = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{tag:8s} {name}")

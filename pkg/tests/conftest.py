import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    max_examples=int(os.environ.get("HYPOTHESIS_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def topo():
    from streamsched.network import reference_topology

    return reference_topology()


@pytest.fixture(scope="session")
def spg():
    from streamsched.experiments import fixture_graph

    return fixture_graph("fig3_graph.json")


@pytest.fixture(scope="session")
def imprecise_graph():
    from streamsched.experiments import fixture_graph

    return fixture_graph("imprecise_graph.json")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

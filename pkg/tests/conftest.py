import os

import pytest

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario_path(name: str) -> str:
    return os.path.abspath(os.path.join(SCENARIO_DIR, name))


@pytest.fixture
def two_cluster_topology() -> str:
    with open(scenario_path("two_cluster.topo")) as fh:
        return fh.read()

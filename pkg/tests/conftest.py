import json

import numpy as np
import pytest

from gridpea.network import ieee14, load_case
from gridpea.powerflow import solve_nr


@pytest.fixture(scope="session")
def net14():
    return ieee14()


@pytest.fixture(scope="session")
def pf14(net14):
    return solve_nr(net14, tol=1e-10)


def make_case(buses, lines, gens, base_mva=100.0):
    return json.dumps({"base_mva": base_mva, "buses": buses, "lines": lines, "gens": gens})


def two_bus_case(load=(0.5, 0.2), x=0.1, r=0.0, b=0.0, vset=1.0):
    """Slack + PQ load over one line; machine on the slack bus."""
    return make_case(
        buses=[
            {"id": 0, "kind": "slack", "load": [0.0, 0.0], "gen": [0.0, vset]},
            {"id": 1, "kind": "PQ", "load": list(load), "gen": None},
        ],
        lines=[{"id": 0, "from": 0, "to": 1, "r1": r, "x1": x, "b1": b,
                "r0": 3 * r, "x0": 3 * x, "in_service": True}],
        gens=[{"bus": 0, "x1s": 0.2, "x2": 0.2, "x0": 0.1, "grounded": True}],
    )


def symmetric_two_machine_case(x=0.1):
    """Two identical machine buses joined by one line, no load: a network
    symmetric under swapping the two buses."""
    return make_case(
        buses=[
            {"id": 0, "kind": "slack", "load": [0.0, 0.0], "gen": [0.0, 1.0]},
            {"id": 1, "kind": "PV", "load": [0.0, 0.0], "gen": [0.0, 1.0]},
        ],
        lines=[{"id": 0, "from": 0, "to": 1, "r1": 0.0, "x1": x, "b1": 0.0,
                "r0": 0.0, "x0": 3 * x, "in_service": True}],
        gens=[
            {"bus": 0, "x1s": 0.2, "x2": 0.2, "x0": 0.1, "grounded": True},
            {"bus": 1, "x1s": 0.2, "x2": 0.2, "x0": 0.1, "grounded": True},
        ],
    )


@pytest.fixture()
def net2():
    return load_case(two_bus_case())


@pytest.fixture()
def net2sym():
    return load_case(symmetric_two_machine_case())

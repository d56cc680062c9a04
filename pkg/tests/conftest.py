import random

import pytest
from hypothesis import strategies as st

from dscm import fixtures as F
from dscm.dmg import ADAPTED, DMG, PREDICTABLE
from dscm.sde.system import graph_of_sdes


@pytest.fixture
def example():
    return F.example1()


@pytest.fixture
def augmented(example):
    return graph_of_sdes(example)


@st.composite
def dmgs(draw, min_nodes=1, max_nodes=5):
    """Random DMG over V0..V{n-1} with random edge dependences."""
    n = draw(st.integers(min_nodes, max_nodes))
    nodes = [f"V{i}" for i in range(n)]
    pairs = [(u, v) for u in nodes for v in nodes if u != v]
    directed = draw(st.lists(st.sampled_from(pairs), max_size=2 * n, unique=True)) if pairs else []
    spouses = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]
    bidirected = draw(st.lists(st.sampled_from(spouses), max_size=n, unique=True)) if spouses else []
    dep = st.sampled_from([PREDICTABLE, ADAPTED])
    return DMG(nodes, [(u, v, draw(dep)) for u, v in directed],
               [(u, v, draw(dep)) for u, v in bidirected])


@st.composite
def queries(draw, g):
    """Disjoint-or-not node sets (a, b, c) with a and b nonempty."""
    nodes = list(g.nodes)
    a = draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=2))
    b = draw(st.sets(st.sampled_from(nodes), min_size=1, max_size=2))
    c = draw(st.sets(st.sampled_from(nodes), max_size=3))
    return a, b, c


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)

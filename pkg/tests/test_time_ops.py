import random

import pytest
from hypothesis import given, settings, strategies as st

from dscm import dmg
from dscm import fixtures as F
from dscm import time_ops as T
from dscm.dmg import ADAPTED, PREDICTABLE, GraphError
from dscm.oracles import random_system
from dscm.sde import graph_of_sdes, parse_model


CHAIN = """
system {
  exogenous W: brownian;
  process A { init = constant(0); alpha = {}; beta = {W}; g = [1]; }
  process B { init = constant(0); alpha = {A}; beta = {W}; g = [A]; }
  horizon 1;
}
"""


@pytest.fixture
def chain():
    return graph_of_sdes(parse_model(CHAIN))


def _pieces(h):
    return {n.name: n.piece for n in h.node_ids() if n.piece is not None}


# -- split points ----------------------------------------------------------

def test_parse_tau_spaces_unbound_names_evenly():
    assert T.parse_tau("0,s,t") == [("0", 0.0), ("s", 1 / 3), ("t", 2 / 3)]
    assert T.parse_tau("s=0.4,t") == [("s", 0.4), ("t", 0.7)]
    assert T.parse_tau("0.25, T") == [("0.25", 0.25), ("T", 1.0)]
    assert T.parse_tau("a,b", horizon=3.0) == [("a", 1.0), ("b", 2.0)]


@pytest.mark.parametrize("bad", ["s=0.5,t=0.2", "0.5,0.5", "x-1"])
def test_parse_tau_rejects(bad):
    with pytest.raises(GraphError):
        T.parse_tau(bad)


def test_split_partition_examples():
    assert T.split_partition("").labels == ["[0,T]"]
    assert T.split_partition("0").labels == ["0", "(0,T]"]
    assert T.split_partition("T").labels == ["[0,T)", "T"]
    assert T.split_partition("0,s,t").labels == ["0", "(0,s)", "s", "(s,t)", "t", "(t,T]"]
    # splitting twice at the same point changes nothing
    once = T.split_partition("0.5")
    assert T.split_partition([0.5], once) == once


def test_split_point_outside_horizon():
    with pytest.raises(GraphError, match="outside"):
        T.split_partition([1.5])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), max_size=5, unique=True))
def test_partitions_always_cover_the_axis(points):
    part = T.split_partition(sorted(points))
    assert part.covers()
    assert len(part) == 1 + sum(2 if 0 < t < 1 else 1 for t in points)


def test_piece_order_relations():
    part = T.split_partition("s=0.5").pieces
    left, point, right = part
    assert T.lt(left, point) and T.lt(point, right) and not T.lt(point, point)
    assert T.le(point, point) and not T.le(right, left)
    assert point.overlaps(point) and not left.overlaps(point)


# -- time splitting ------------------------------------------------------

def test_no_split_points_returns_the_graph(chain):
    assert T.time_split_graph(chain, "").graph == chain


def test_split_at_zero_reuses_the_initial_node(chain):
    h = T.time_split_graph(chain, "0").graph
    assert set(h.nodes) == {"A^0", "A^(0,T]", "B^0", "B^(0,T]", "W"}
    assert h.has_edge("A^0", "A^(0,T]") and h.has_edge("A^(0,T]", "B^(0,T]")
    assert not h.has_edge("A^0", "B^(0,T]")


def test_chain_split_nodes_and_forward_edges(chain):
    h = T.time_split_graph(chain, "0,s,t").graph
    assert len([n for n in h.nodes if n.startswith("A^")]) == 6
    pieces = _pieces(h)
    for u, v, _ in h.directed_edges:
        if u in pieces and v in pieces:
            assert T.le(pieces[u], pieces[v])
    # predictable A -> B: no edge between simultaneous points
    assert not h.has_edge("A^s", "B^s")
    assert h.has_edge("A^(0,s)", "B^s")
    assert h.dependence("W", "B^s") == ADAPTED


def test_adapted_parent_feeds_the_same_piece():
    g = dmg.DMG(["U", "V"], [("U", "V", ADAPTED)], meta={"horizon": 1.0})
    h = T.time_split_graph(g, "s=0.5").graph
    assert h.dependence("U^s", "V^s") == ADAPTED
    assert h.dependence("U^[0,s)", "V^s") == PREDICTABLE
    assert not h.has_edge("U^(s,T]", "V^s")


def test_markov_pruning_keeps_recent_pieces(chain):
    h = T.time_split_graph(chain, "0,s,t", markov=True).graph
    assert not h.has_edge("A^(0,s)", "A^t")
    assert h.has_edge("A^(s,t)", "A^t")
    assert not h.has_edge("A^(0,s)", "B^t")
    assert h.has_edge("A^s", "B^(s,t)")


def test_markov_flags_per_process(chain):
    sg = T.time_split_graph(chain, "0,s,t", markov={"B": True})
    assert sg.markov == {"A": False, "B": True}
    assert sg.graph.has_edge("A^(0,s)", "A^t")
    with pytest.raises(GraphError, match="unknown process"):
        T.time_split_graph(chain, "0", markov={"Q": True})


def test_bidirected_input_is_rejected():
    g = dmg.DMG(["U", "V"], [], [("U", "V", ADAPTED)])
    with pytest.raises(GraphError):
        T.time_split_graph(g, "0")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["0", "0,s", "s,t", "0,s,t"]))
def test_markov_pruning_only_removes_edges(seed, tau):
    g = graph_of_sdes(random_system(random.Random(seed)))
    full = T.time_split_graph(g, tau).graph
    pruned = T.time_split_graph(g, tau, markov=True).graph
    assert full.nodes == pruned.nodes
    assert set(pruned.directed_edges) <= set(full.directed_edges)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["0", "T", "0,s", "s,t", "0,s,t"]),
       st.booleans())
def test_collapse_undoes_split(seed, tau, markov):
    g = graph_of_sdes(random_system(random.Random(seed)))
    assert T.collapse_graph(T.time_split_graph(g, tau, markov=markov), require_cover=True) == g


# -- subsampling and collapsing ------------------------------------------

def test_subsampled_chain(chain):
    sub = T.subsample_graph(T.time_split_graph(chain, "0,s,t"))
    assert set(sub.nodes) == {"A^0", "A^s", "A^t", "B^0", "B^s", "B^t", "W"}
    assert sub.has_edge("A^s", "B^t") and sub.has_edge("A^0", "B^s")
    assert not sub.has_edge("A^s", "B^s")
    # the interval before s was a common parent of A^s and B^s
    assert sub.has_bidirected("A^s", "B^s")


def test_collapse_of_subsample_names_the_points(chain):
    sub = T.subsample_graph(T.time_split_graph(chain, "0,s,t"))
    assert set(T.collapse_graph(sub).nodes) == {"A^0", "A^{s,t}", "B^0", "B^{s,t}", "W"}
    with pytest.raises(GraphError, match="gap"):
        T.collapse_graph(sub, require_cover=True)


def test_collapse_keeps_an_initial_only_process(chain):
    sub = T.subsample_graph(T.time_split_graph(chain, "0"))
    assert set(T.collapse_graph(sub).nodes) == {"A^0", "A^{0}", "B^0", "B^{0}", "W"}


def test_marginalise_unknown_node(chain):
    with pytest.raises(GraphError, match="unknown"):
        T.marginalise_graph(chain, ["Q"])
    assert "A" not in T.marginalise_graph(chain, ["A"]).nodes


# -- the worked example --------------------------------------------------

def _edges(g):
    return {(u, v, d) for u, v, d in g.directed_edges}


def test_example_split_and_subsampled_graphs(augmented):
    m = T.marginalise_graph(augmented, F.SPLIT_DROPPED)
    sg = T.time_split_graph(m, F.SPLIT_TAU, markov=True, mode="figure")
    assert _edges(sg.graph) == F.SPLIT_EDGES
    sub = T.subsample_graph(sg)
    assert F.SUBSAMPLED_EDGES <= _edges(sub)
    assert {("X2^0", "X4^s", PREDICTABLE), ("X2^s", "X4^t", PREDICTABLE)} <= _edges(sub)


def test_pieces_recovered_from_names(chain):
    h = T.time_split_graph(chain, "0,s,t").graph
    bare = dmg.parse_edges(dmg.export_edges(h))
    assert T.collapse_graph(T.attach_pieces(bare, "0,s,t"), require_cover=True) == chain

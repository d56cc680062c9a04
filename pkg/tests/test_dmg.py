import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from dscm import dmg
from dscm.dmg import ADAPTED, DMG, EXOGENOUS, PREDICTABLE, GraphError, NodeId
from dscm.oracles import (WalkOracle, brute_ancestors, brute_sccs, random_dmg)

from conftest import dmgs, queries


def test_rejects_self_loops_and_unknown_endpoints():
    with pytest.raises(GraphError):
        DMG(["a"], [("a", "a")])
    with pytest.raises(GraphError):
        DMG(["a"], [("a", "b")])


def test_exogenous_node_cannot_have_parents():
    with pytest.raises(GraphError):
        DMG([NodeId("w", EXOGENOUS), "x"], [("x", "w")])


def test_repeated_edge_keeps_adapted():
    g = DMG(["a", "b"], [("a", "b", PREDICTABLE), ("a", "b", ADAPTED)])
    assert g.dependence("a", "b") == ADAPTED
    assert len(g.directed_edges) == 1


def test_sccs_of_the_example(augmented):
    comps = set(dmg.scc_partition(augmented))
    assert frozenset({"X1", "X2", "X3"}) in comps
    assert frozenset({"X4"}) in comps


def test_scc_order_is_topological(augmented):
    order = dmg.scc_partition(augmented)
    pos = {v: i for i, comp in enumerate(order) for v in comp}
    for u, v, _ in augmented.directed_edges:
        assert pos[u] <= pos[v]


def test_edgeless_graph_has_singleton_sccs():
    g = DMG(["a", "b", "c"])
    assert set(dmg.scc_partition(g)) == {frozenset("a"), frozenset("b"), frozenset("c")}


@settings(max_examples=200, deadline=None)
@given(dmgs(max_nodes=6))
def test_sccs_match_mutual_reachability(g):
    assert set(dmg.scc_partition(g)) == brute_sccs(g)


def test_ancestors_of_x4(augmented):
    want = {"X4", "X2", "X1", "X3", "N", "W", "X1^0", "X2^0", "X3^0", "X4^0"}
    assert dmg.ancestors(augmented, ["X4"]) == want
    assert dmg.ancestors(augmented, []) == frozenset()
    assert dmg.ancestors(augmented, augmented.nodes) == set(augmented.nodes)


@settings(max_examples=200, deadline=None)
@given(dmgs(max_nodes=6), st.data())
def test_ancestors_match_reachability(g, data):
    s = data.draw(st.sets(st.sampled_from(list(g.nodes))))
    assert dmg.ancestors(g, s) == brute_ancestors(g, s)


def test_example_separates_initial_values_only_under_d(augmented):
    assert dmg.d_separated(augmented, ["X1^0"], ["X2^0"], ["X1", "X2"])
    assert not dmg.sigma_separated(augmented, ["X1^0"], ["X2^0"], ["X1", "X2"])


def test_disconnected_nodes_are_separated_by_anything():
    g = DMG(["a", "b", "c"], [("c", "a")])
    for c in ([], ["c"], ["a", "c"]):
        assert dmg.sigma_separated(g, ["a"], ["b"], c)


def test_shared_node_is_never_separated():
    g = DMG(["a", "b"])
    assert not dmg.sigma_separated(g, ["a"], ["a", "b"], ["a"])


def test_cycle_member_in_conditioning_set_does_not_block():
    # the walk a -> x -> y stays open given x: x's child y is in its SCC
    g = DMG(["a", "x", "y", "z"], [("a", "x"), ("x", "y"), ("y", "z"), ("z", "x")])
    assert not dmg.sigma_separated(g, ["a"], ["y"], ["x", "z"])
    assert dmg.d_separated(g, ["a"], ["y"], ["x", "z"])


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_separation_matches_walk_enumeration(data):
    g = data.draw(dmgs(max_nodes=5))
    a, b, c = data.draw(queries(g))
    o = WalkOracle(g)
    assert dmg.sigma_separated(g, a, b, c) == (not o.connected(a, b, c, sigma=True))
    assert dmg.d_separated(g, a, b, c) == (not o.connected(a, b, c, sigma=False))


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_sigma_separation_implies_d_separation(data):
    g = data.draw(dmgs(max_nodes=6))
    a, b, c = data.draw(queries(g))
    if dmg.sigma_separated(g, a, b, c):
        assert dmg.d_separated(g, a, b, c)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_sigma_and_d_agree_on_acyclic_graphs(data):
    n = data.draw(st.integers(1, 6))
    nodes = [f"V{i}" for i in range(n)]
    order = data.draw(st.permutations(nodes))
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    directed = data.draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    bi = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=3)) if pairs else []
    g = DMG(nodes, directed, bi)
    a, b, c = data.draw(queries(g))
    assert dmg.sigma_separated(g, a, b, c) == dmg.d_separated(g, a, b, c)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_separation_is_symmetric(data):
    g = data.draw(dmgs())
    a, b, c = data.draw(queries(g))
    assert dmg.sigma_separated(g, a, b, c) == dmg.sigma_separated(g, b, a, c)


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_removing_an_edge_never_destroys_a_separation(data):
    g = data.draw(dmgs())
    edges = [("d", e) for e in g.directed_edges] + [("b", e) for e in g.bidirected_edges]
    if not edges:
        return
    kind, e = data.draw(st.sampled_from(edges))
    if kind == "d":
        h = g.replace(directed=[x for x in g.directed_edges if x != e])
    else:
        h = g.replace(bidirected=[x for x in g.bidirected_edges if x != e])
    a, b, c = data.draw(queries(g))
    if dmg.sigma_separated(g, a, b, c):
        assert dmg.sigma_separated(h, a, b, c)


# -- projections ---------------------------------------------------------

def test_projection_of_nothing_is_identity(augmented):
    assert dmg.latent_project(augmented, []) == augmented


def test_projecting_an_isolated_node_just_removes_it():
    g = DMG(["a", "b", "z"], [("a", "b")])
    assert dmg.latent_project(g, ["z"]) == DMG(["a", "b"], [("a", "b")])


def test_projection_through_dropped_cycle_member(augmented):
    g = dmg.to_dmg(augmented)
    h = dmg.latent_project(g, ["X3", "X4"])
    assert set(h.nodes) == {"X1", "X2"}
    assert h.has_edge("X2", "X1") and h.has_edge("X1", "X2")


def test_projection_marks_adapted_paths():
    g = DMG(["a", "l", "b"], [("a", "l", ADAPTED), ("l", "b", ADAPTED)])
    assert dmg.latent_project(g, ["l"]).dependence("a", "b") == ADAPTED
    g = DMG(["a", "l", "b"], [("a", "l", ADAPTED), ("l", "b", PREDICTABLE)])
    assert dmg.latent_project(g, ["l"]).dependence("a", "b") == PREDICTABLE


def test_common_dropped_cause_becomes_bidirected():
    g = DMG(["l", "a", "b"], [("l", "a"), ("l", "b")])
    h = dmg.latent_project(g, ["l"])
    assert h.has_bidirected("a", "b") and not h.directed_edges


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_projections_compose(data):
    g = data.draw(dmgs(min_nodes=2, max_nodes=6))
    nodes = list(g.nodes)
    l1 = data.draw(st.sets(st.sampled_from(nodes), max_size=len(nodes) - 1))
    rest = [n for n in nodes if n not in l1]
    l2 = data.draw(st.sets(st.sampled_from(rest), max_size=len(rest) - 1))
    step = dmg.latent_project(dmg.latent_project(g, l1), l2)
    assert step == dmg.latent_project(g, l1 | l2)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_projection_preserves_separations_among_kept_nodes(data):
    g = data.draw(dmgs(min_nodes=2, max_nodes=6))
    nodes = list(g.nodes)
    drop = data.draw(st.sets(st.sampled_from(nodes), max_size=len(nodes) - 2))
    h = dmg.latent_project(g, drop)
    a, b, c = data.draw(queries(h))
    assert dmg.sigma_separated(g, a, b, c) == dmg.sigma_separated(h, a, b, c)
    assert dmg.d_separated(g, a, b, c) == dmg.d_separated(h, a, b, c)


def test_to_dmg_of_the_example(augmented):
    g = dmg.to_dmg(augmented)
    assert set(g.nodes) == {"X1", "X2", "X3", "X4"}
    assert set(g.directed_edges) == {("X1", "X2", PREDICTABLE), ("X2", "X3", PREDICTABLE),
                                     ("X3", "X1", PREDICTABLE), ("X2", "X4", ADAPTED)}
    assert g.has_bidirected("X1", "X3") and g.dependence("X1", "X3", bidirected=True) == ADAPTED
    assert len(g.bidirected_edges) == 1


def test_to_dmg_bidirected_closure():
    w = NodeId("w", EXOGENOUS)
    assert not dmg.to_dmg(DMG([w, "a"], [("w", "a")])).bidirected_edges
    g = dmg.to_dmg(DMG([w, "a", "b", "c"], [("w", "a"), ("w", "b"), ("w", "c")]))
    assert len(g.bidirected_edges) == 3


def test_intervention_removes_arrowheads_at_targets(augmented):
    g = dmg.intervene_graph(dmg.to_dmg(augmented), ["X2"])
    assert not g.has_edge("X1", "X2")
    assert g.has_edge("X2", "X3") and g.has_edge("X2", "X4")
    assert g.has_bidirected("X1", "X3")


def test_intervention_on_exogenous_node_is_refused(augmented):
    with pytest.raises(GraphError):
        dmg.intervene_graph(augmented, ["W"])


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_intervention_commutes_with_projection(data):
    g = data.draw(dmgs(min_nodes=2, max_nodes=6))
    nodes = list(g.nodes)
    drop = data.draw(st.sets(st.sampled_from(nodes), max_size=len(nodes) - 1))
    kept = [n for n in nodes if n not in drop]
    t = data.draw(st.sets(st.sampled_from(kept)))
    left = dmg.intervene_graph(dmg.latent_project(g, drop), t)
    right = dmg.latent_project(dmg.intervene_graph(g, t), drop)
    assert left == right


# -- text formats --------------------------------------------------------

def test_dot_export_marks_edges(augmented):
    text = dmg.export_dot(dmg.to_dmg(augmented))
    assert '"X2" -> "X4" [color=red];' in text
    assert "dir=both" in text
    assert dmg.parse_dot(dmg.export_dot(augmented)) == augmented


def test_empty_graph_dot_is_header_only():
    assert dmg.export_dot(DMG()).splitlines() == ["digraph G {", "}"]


@settings(max_examples=100, deadline=None)
@given(dmgs())
def test_text_formats_round_trip(g):
    assert dmg.parse_dot(dmg.export_dot(g)) == g
    assert dmg.parse_edges(dmg.export_edges(g)) == g


def test_edge_list_errors_carry_line_numbers():
    with pytest.raises(GraphError, match="line 2"):
        dmg.parse_edges("a -> b\na => c\n")


def test_random_graphs_are_reproducible():
    a = random_dmg(random.Random(7), 5)
    b = random_dmg(random.Random(7), 5)
    assert a == b


def test_walk_oracle_on_all_three_node_graphs_with_two_edges():
    nodes = ["a", "b", "c"]
    slots = [("d", u, v) for u in nodes for v in nodes if u != v]
    slots += [("b", u, v) for u, v in itertools.combinations(nodes, 2)]
    for chosen in itertools.combinations(slots, 2):
        g = DMG(nodes, [(u, v) for k, u, v in chosen if k == "d"],
                [(u, v) for k, u, v in chosen if k == "b"])
        o = WalkOracle(g)
        for c in ([], ["c"]):
            assert dmg.sigma_separated(g, ["a"], ["b"], c) == (not o.connected(["a"], ["b"], c))

import pytest
from hypothesis import given, settings, strategies as st

from dscm import dmg
from dscm.dmg import ADAPTED, DMG, PREDICTABLE, GraphError
from dscm.independence import (GuaranteeError, IndependenceModel, InconsistentModel,
                               check_independent_integrators, docalc_check, enumerate_im,
                               integrators, local_independence_graph, sigma_li_query,
                               with_intervention_nodes)
from dscm.sde import induced_dscm_graph

from conftest import dmgs


def _chain():
    return DMG(["X", "M", "Y"], [("X", "M", PREDICTABLE), ("M", "Y", PREDICTABLE)])


# -- independence models -------------------------------------------------

def test_chain_has_one_separation():
    im = enumerate_im(_chain())
    assert im.separations() == [(frozenset("X"), frozenset("Y"), frozenset("M"))]
    assert im.separated(["Y"], ["X"], ["M"])  # symmetric
    assert not im.separated(["X"], ["Y"], [])


def test_text_round_trip():
    im = enumerate_im(_chain())
    text = im.to_text()
    assert "M _||_" not in text and "X _||_ Y | M" in text
    assert IndependenceModel.from_text(text) == im


def test_text_with_dependences_is_incomplete():
    im = IndependenceModel.from_text("a _||_ b |\nnot a _||_ b | c\n")
    assert not im.complete and im.universe == ("a", "b", "c")
    with pytest.raises(KeyError):
        im.separated(["a"], ["c"], [])
    assert IndependenceModel.from_text(im.to_text()).statements == im.statements


def test_contradictory_statements():
    with pytest.raises(InconsistentModel):
        IndependenceModel.from_text("a _||_ b | c\nnot b _||_ a | c\n")


def test_unparseable_statement():
    with pytest.raises(ValueError):
        IndependenceModel.from_text("a b c\n")


def test_enumeration_limit():
    g = DMG([f"V{i}" for i in range(12)], [])
    with pytest.raises(GraphError, match="limit"):
        enumerate_im(g)


@settings(max_examples=60, deadline=None)
@given(dmgs(2, 5))
def test_enumeration_agrees_with_separation(g):
    im = enumerate_im(g, max_set_size=2)
    for a, b, c in im.separations():
        assert dmg.sigma_separated(g, a, b, c)
    assert set(im.separations()) <= set(enumerate_im(g, max_set_size=3).separations())


@settings(max_examples=60, deadline=None)
@given(dmgs(2, 5))
def test_removing_an_edge_never_removes_a_separation(g):
    if not g.directed_edges:
        return
    u, v, _ = g.directed_edges[0]
    smaller = g.replace(directed=[e for e in g.directed_edges if e[:2] != (u, v)])
    assert set(enumerate_im(g).separations()) <= set(enumerate_im(smaller).separations())


# -- integrators and local independence ----------------------------------

def test_example_fails_the_integrator_check(example, augmented):
    report = check_independent_integrators(augmented, example)
    assert not report
    assert "X4: integrator X2 is endogenous" in report.violations
    assert "X1, X3: share integrator(s) W" in report.violations


def test_marginal_of_the_example_passes(augmented):
    lig = local_independence_graph(dmg.latent_project(augmented, ["X3", "X4"]))
    assert lig.guarantee
    assert lig.graph.nodes == ("X1", "X2")
    assert lig.certificates() == []


def test_integrators_read_from_adapted_edges(augmented):
    beta = integrators(augmented)
    assert beta["X4"] == {"X2"}
    assert beta["X1"] == {"W"}


def test_no_integrators_passes():
    g = DMG(["A", "B"], [("A", "B", PREDICTABLE)])
    assert check_independent_integrators(g)


def test_adapted_confounding_fails():
    g = DMG(["A", "B"], [], [("A", "B", ADAPTED)])
    assert not check_independent_integrators(g)


def test_query_without_guarantee_raises(example):
    lig = local_independence_graph(induced_dscm_graph(example))
    with pytest.raises(GuaranteeError, match="independent integrators"):
        sigma_li_query(lig, ["X4"], ["X1"])


def test_local_independence_queries():
    g = DMG(["A", "B", "C"], [("A", "B", PREDICTABLE), ("B", "C", PREDICTABLE)])
    lig = local_independence_graph(g)
    assert lig.guarantee
    assert ("C", "A") in lig.certificates() and ("A", "B") not in lig.certificates()
    assert sigma_li_query(lig, ["A"], ["C"], ["B"]).holds
    assert not sigma_li_query(lig, ["A"], ["C"], []).holds
    with pytest.raises(ValueError):
        sigma_li_query(lig, ["A"], [], [])


# -- do-calculus -------------------------------------------------------

def test_rule2_on_a_chain():
    assert docalc_check(_chain(), 2, ["X"], ["Y"])


def test_rule2_fails_with_confounding():
    g = DMG(["X", "Y"], [("X", "Y", PREDICTABLE)], [("X", "Y", PREDICTABLE)])
    assert not docalc_check(g, 2, ["X"], ["Y"])


def test_rule3_on_the_example(example):
    g = induced_dscm_graph(example)
    assert docalc_check(g, 3, ["X4"], ["X1"])
    assert not docalc_check(g, 3, ["X1"], ["X4"])


def test_rule1_needs_separation_after_surgery():
    g = _chain()
    assert docalc_check(g, 1, ["X"], ["Y"], ["M"])
    assert not docalc_check(g, 1, ["X"], ["Y"])
    assert docalc_check(g, 1, ["X"], ["Y"], w=["M"])


def test_docalc_argument_errors():
    g = _chain()
    with pytest.raises(GraphError, match="overlap"):
        docalc_check(g, 1, ["X"], ["X"])
    with pytest.raises(GraphError, match="unknown node"):
        docalc_check(g, 1, ["Q"], ["Y"])
    with pytest.raises(GraphError, match="rule"):
        docalc_check(g, 4, ["X"], ["Y"])
    with pytest.raises(GraphError, match="nonempty"):
        docalc_check(g, 1, [], ["Y"])


def test_intervention_node_clash():
    g = DMG(["X", "I_X"], [])
    with pytest.raises(GraphError, match="in use"):
        with_intervention_nodes(g, ["X"])


def test_interval_names_survive_the_text_format():
    g = DMG(["X^(0,T]", "Y^(0,T]", "Z^0"], [("Z^0", "X^(0,T]", PREDICTABLE),
                                             ("Z^0", "Y^(0,T]", PREDICTABLE)])
    im = enumerate_im(g)
    assert im.separated(["X^(0,T]"], ["Y^(0,T]"], ["Z^0"])
    assert IndependenceModel.from_text(im.to_text()) == im


@st.composite
def acyclic_dmgs(draw, max_nodes=5):
    n = draw(st.integers(2, max_nodes))
    nodes = [f"V{i}" for i in range(n)]
    pairs = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)]
    directed = draw(st.lists(st.sampled_from(pairs), max_size=2 * n, unique=True))
    bidirected = draw(st.lists(st.sampled_from(pairs), max_size=2, unique=True))
    return DMG(nodes, [(u, v, PREDICTABLE) for u, v in directed],
               [(u, v, PREDICTABLE) for u, v in bidirected])


@settings(max_examples=150, deadline=None)
@given(acyclic_dmgs(), st.data())
def test_rule2_matches_the_backdoor_test(g, data):
    x = data.draw(st.sampled_from(g.nodes))
    y = data.draw(st.sampled_from([n for n in g.nodes if n != x]))
    # classic form: y and x d-separated once the edges out of x are removed
    cut = g.replace(directed=[e for e in g.directed_edges if e[0] != x])
    assert docalc_check(g, 2, [x], [y]) == dmg.d_separated(cut, [x], [y], [])

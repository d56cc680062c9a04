import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from dscm import data_path, dmg
from dscm import fixtures as F
from dscm.dmg import ADAPTED, PREDICTABLE
from dscm.oracles import random_system
from dscm.sde import (ModelError, UnsolvableError, check_unique_solvability, graph_of_sdes,
                      induced_dscm_graph, intervene_sde, parse_model, print_model)
from dscm.sde import expr as E


ONE = """
system {
  exogenous TT: time;
  process X { init = constant(1.0); alpha = {X}; beta = {TT}; g = [-X]; }
  horizon 2.0;
}
"""


def test_example_model_loads(example):
    assert example.process("X4").beta == ("X2",)
    assert [d.kind for d in example.drivers] == ["brownian", "poisson"]
    assert example.horizon == 1.0


def test_empty_system_is_rejected():
    with pytest.raises(ModelError, match="no processes"):
        parse_model("system { horizon 1.0; }")
    with pytest.raises(ModelError, match="no processes"):
        parse_model("system { }")


def test_unresolved_name_is_reported_with_position():
    text = "system {\n  process X { init = constant(0); alpha = {Z}; beta = {}; g = []; }\n  horizon 1;\n}"
    with pytest.raises(ModelError) as err:
        parse_model(text)
    d = err.value.diagnostics[0]
    assert "unresolved name 'Z'" in d.message
    assert (d.line, d.col) == (2, 44)


def test_syntax_error_position():
    with pytest.raises(ModelError) as err:
        parse_model("system {\n  process X { init = constant(0) alpha = {}; }\n}")
    d = err.value.diagnostics[0]
    assert d.line == 2 and "expected ';'" in d.message


def test_integrand_count_must_match_integrators():
    text = ONE.replace("g = [-X]", "g = [-X, 1]")
    with pytest.raises(ModelError, match="2 integrand"):
        parse_model(text)


def test_integrand_outside_alpha_is_an_error():
    text = ONE.replace("g = [-X]", "g = [-X * Y]").replace("exogenous TT", "exogenous Y: brownian;\n  exogenous TT")
    with pytest.raises(ModelError, match="outside alpha"):
        parse_model(text)


def test_exp_draws_a_warning():
    sys = parse_model(ONE.replace("g = [-X]", "g = [exp(X)]"))
    assert sys.warnings and sys.warnings[0].severity == "warning"


def test_print_then_parse_is_identity(example):
    assert parse_model(print_model(example)) == example
    with open(data_path("example1.dscm")) as fh:
        assert parse_model(print_model(parse_model(fh.read()))) == example


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_round_trip_on_random_systems(seed):
    sys = random_system(random.Random(seed), solvable=False)
    assert parse_model(print_model(sys)) == sys


def test_expression_evaluation():
    x = E.BinOp("+", E.Num(1.0), E.BinOp("*", E.Num(2.0), E.Var("X")))
    assert E.evaluate(x, {"X": 3.0}) == 7.0
    assert E.variables(x) == {"X"}


# -- graphs --------------------------------------------------------------

def test_example_augmented_graph(augmented):
    assert set(augmented.directed_edges) == F.EXAMPLE_AUGMENTED_EDGES
    assert not augmented.bidirected_edges


def test_single_process_with_time_driver():
    g = graph_of_sdes(parse_model(ONE))
    assert set(g.directed_edges) == {("TT", "X", ADAPTED), ("X^0", "X", PREDICTABLE)}


def test_parent_in_both_alpha_and_beta_gives_one_adapted_edge():
    text = """
    system {
      process A { init = constant(0); alpha = {A}; beta = {}; g = []; }
      process B { init = constant(0); alpha = {A}; beta = {A}; g = [A]; }
      horizon 1;
    }"""
    g = graph_of_sdes(parse_model(text))
    assert g.dependence("A", "B") == ADAPTED
    assert sum(1 for u, v, _ in g.directed_edges if (u, v) == ("A", "B")) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_graph_never_has_self_loops(seed):
    g = graph_of_sdes(random_system(random.Random(seed), solvable=False))
    assert all(u != v for u, v, _ in g.directed_edges)


def test_example_is_uniquely_solvable(example):
    report = check_unique_solvability(example)
    assert report.solvable and report.witness is None
    order = list(report.order)
    cycle = order.index(frozenset({"X1", "X2", "X3"}))
    assert order.index(frozenset({"X4"})) > cycle
    for v in ("W", "N", "X1^0", "X2^0", "X3^0", "X4^0"):
        assert order.index(frozenset({v})) < cycle


def test_integrator_inside_its_cycle_is_unsolvable(example):
    bad = replace(example, processes=tuple(
        replace(p, beta=("X2",)) if p.name == "X3" else p for p in example.processes))
    report = check_unique_solvability(bad)
    assert not report.solvable
    assert report.witness == ("X3", frozenset({"X2"}))
    with pytest.raises(UnsolvableError):
        induced_dscm_graph(bad)


def test_acyclic_systems_are_always_solvable():
    text = """
    system {
      exogenous W: brownian;
      process A { init = constant(0); alpha = {}; beta = {W}; g = [1]; }
      process B { init = constant(0); alpha = {}; beta = {A}; g = [1]; }
      horizon 1;
    }"""
    assert check_unique_solvability(parse_model(text))


def test_induced_graph_of_the_example(example):
    g = induced_dscm_graph(example)
    assert set(g.directed_edges) == F.EXAMPLE_MIXED_DIRECTED
    assert {(u, v, d) for u, v, d in g.bidirected_edges} in (
        F.EXAMPLE_MIXED_BIDIRECTED, {("X3", "X1", ADAPTED)})
    assert g.meta["simple"]


def test_induced_graph_of_one_process():
    g = induced_dscm_graph(parse_model(ONE))
    assert g.nodes == ("X",) and not g.bidirected_edges


def test_shared_driver_gives_adapted_bidirected_edge():
    text = """
    system {
      exogenous W: brownian;
      process A { init = constant(0); alpha = {}; beta = {W}; g = [1]; }
      process B { init = constant(0); alpha = {}; beta = {W}; g = [1]; }
      horizon 1;
    }"""
    g = induced_dscm_graph(parse_model(text))
    assert g.has_bidirected("A", "B")
    assert g.dependence("A", "B", bidirected=True) == ADAPTED


# -- interventions -------------------------------------------------------

def test_intervening_on_x2(example):
    g = induced_dscm_graph(intervene_sde(example, ["X2"], 1.5))
    assert not g.has_edge("X1", "X2")
    assert g.has_edge("X2", "X3") and g.has_edge("X2", "X4")
    assert example.process("X2").init.kind == "normal"  # original untouched


def test_empty_intervention_is_identity(example):
    assert intervene_sde(example, []) == example


def test_intervening_on_everything_leaves_no_edges(example):
    g = induced_dscm_graph(intervene_sde(example, example.names))
    assert not g.directed_edges and not g.bidirected_edges


def test_intervention_on_a_driver_is_rejected(example):
    with pytest.raises(ModelError):
        intervene_sde(example, ["W"])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_intervening_commutes_with_taking_the_graph(seed, data):
    sys = random_system(random.Random(seed))
    t = data.draw(st.sets(st.sampled_from(list(sys.names))))
    left = induced_dscm_graph(intervene_sde(sys, t))
    right = dmg.intervene_graph(induced_dscm_graph(sys), t)
    assert left == right

"""Walk through the graph side of the package on the bundled four-process model.

    python demos/graphs_walkthrough.py
"""

from dscm import dmg, fixtures, time_ops
from dscm.discovery import fci
from dscm.independence import (check_independent_integrators, docalc_check, enumerate_im,
                               local_independence_graph)
from dscm.sde import check_unique_solvability, graph_of_sdes, induced_dscm_graph


def show(title, g):
    print(f"\n== {title}")
    print(dmg.export_edges(g), end="")


def main():
    model = fixtures.example1()
    print("solvable:", bool(check_unique_solvability(model)))

    g = graph_of_sdes(model)
    show("augmented graph", g)
    show("mixed graph (exogenous nodes projected out)", induced_dscm_graph(model))

    # X1^0 and X2^0 are d-separated given X1, X2 but the cycle keeps them sigma-connected
    a, b, c = ["X1^0"], ["X2^0"], ["X1", "X2"]
    print("\nd-separated:", dmg.d_separated(g, a, b, c),
          " sigma-separated:", dmg.sigma_separated(g, a, b, c))

    m = time_ops.marginalise_graph(g, fixtures.SPLIT_DROPPED)
    split = time_ops.time_split_graph(m, "0,s,t", markov=True, mode="figure")
    show("X1, X2, X4 split at 0, s, t", split.graph)
    show("... keeping only the time points", time_ops.subsample_graph(split))

    h = time_ops.time_split_graph(g, "0").graph
    nodes = [n for n in h.nodes if h.role(n) == dmg.ENDOGENOUS]
    print("\n== FCI on the graph split at 0")
    print(fci(enumerate_im(h, nodes=nodes)).to_text(), end="")

    print("\n== local independence")
    print("integrators:", check_independent_integrators(g, model).violations)
    lig = local_independence_graph(dmg.latent_project(g, ["X3", "X4"]))
    print("after dropping X3, X4: guarantee =", lig.guarantee)

    mixed = induced_dscm_graph(model)
    print("\ndo(X4) leaves X1 unchanged (rule 3):", docalc_check(mixed, 3, ["X4"], ["X1"]))


if __name__ == "__main__":
    main()

"""Reference graphs for the four-process example, and the small systems
used by the statistical checks."""

from __future__ import annotations

from typing import Dict, List, Set, Tuple

from . import data_path
from .sde import parse_model
from .sde.system import SdeSystem

A, P = "adapted", "predictable"

# Augmented graph of the four-process example.
EXAMPLE_AUGMENTED_EDGES = {
    ("X1^0", "X1", P), ("X2^0", "X2", P), ("X3^0", "X3", P), ("X4^0", "X4", P),
    ("W", "X1", A), ("W", "X3", A), ("N", "X2", A), ("X2", "X4", A),
    ("X1", "X2", P), ("X2", "X3", P), ("X3", "X1", P),
}

# Its mixed graph.
EXAMPLE_MIXED_DIRECTED = {("X1", "X2", P), ("X2", "X3", P), ("X3", "X1", P), ("X2", "X4", A)}
EXAMPLE_MIXED_BIDIRECTED = {("X1", "X3", A)}

# Processes dropped before splitting at 0, s, t.
SPLIT_DROPPED = ["X3^0", "X3", "X4^0"]
SPLIT_TAU = "0,s,t"


def _chain(proc: str, pieces: List[str]) -> Set[Tuple[str, str, str]]:
    return {(f"{proc}^{a}", f"{proc}^{b}", P) for a, b in zip(pieces, pieces[1:])}


def _split_edges() -> Set[Tuple[str, str, str]]:
    pcs = ["(0,s)", "s", "(s,t)", "t", "(t,T]"]
    e: Set[Tuple[str, str, str]] = set()
    e |= {("X1^0", "X1^(0,s)", P), ("X2^0", "X2^(0,s)", P)}
    e |= {("W", f"X1^{p}", A) for p in pcs}
    e |= {("N", f"X2^{p}", A) for p in pcs}
    e |= _chain("X1", pcs) | _chain("X2", pcs)
    e |= _chain("X4", ["[0,s)", "s", "(s,t)", "t", "(t,T]"])
    for p in ("(0,s)", "(s,t)", "(t,T]"):
        e |= {(f"X1^{p}", f"X2^{p}", P), (f"X2^{p}", f"X1^{p}", P)}
    e |= {("X1^(0,s)", "X2^s", P), ("X2^(0,s)", "X1^s", P),
          ("X1^(s,t)", "X2^t", P), ("X2^(s,t)", "X1^t", P)}
    e |= {("X2^(0,s)", "X4^[0,s)", A), ("X2^(0,s)", "X4^s", P),
          ("X2^(s,t)", "X4^(s,t)", A), ("X2^(s,t)", "X4^t", P),
          ("X2^(t,T]", "X4^(t,T]", A), ("X2^s", "X4^s", A), ("X2^t", "X4^t", A)}
    return e


SPLIT_EDGES = _split_edges()

SUBSAMPLED_EDGES = {
    ("X1^0", "X1^s", P), ("X2^0", "X2^s", P), ("X1^0", "X2^s", P), ("X2^0", "X1^s", P),
    ("W", "X1^s", A), ("W", "X1^t", A), ("N", "X2^s", A), ("N", "X2^t", A),
    ("X1^s", "X2^t", P), ("X2^s", "X1^t", P), ("X2^0", "X4^s", P), ("X2^s", "X4^t", P),
    ("X2^s", "X4^s", A), ("X2^t", "X4^t", A), ("X1^s", "X1^t", P), ("X2^s", "X2^t", P),
}

# FCI output on the split-at-0 graph, with split nodes renamed
# X_v^(0,T] -> X_v. Marks are (mark at a, mark at b).
PAG_NAMES = {f"X{i}^(0,T]": f"X{i}" for i in range(1, 5)}
PAG_EDGES: Dict[Tuple[str, str], str] = {
    ("X1", "X2"): "o-o", ("X2", "X3"): "o-o", ("X1", "X3"): "o-o",
    ("X2", "X4"): "-->", ("X4^0", "X4"): "o->",
}
for _i in (1, 2, 3):
    for _j in (1, 2, 3):
        PAG_EDGES[(f"X{_i}^0", f"X{_j}")] = "o->"


def example1() -> SdeSystem:
    with open(data_path("example1.dscm")) as fh:
        return parse_model(fh.read())


# Linear-Gaussian version of the example: every process has its own time
# driver and the jump driver is replaced by a Brownian motion.
GAUSSIAN_EXAMPLE = """
system {
  exogenous W: brownian;
  exogenous B: brownian;
  exogenous T1: time;
  exogenous T2: time;
  exogenous T3: time;
  exogenous T4: time;
  process X1 {
    init = normal(0.0, 1.0);
    alpha = {X1, X3};
    beta = {T1, W};
    g = [0.6 * X3 - 0.5 * X1, 1.0];
  }
  process X2 {
    init = normal(0.0, 1.0);
    alpha = {X1, X2};
    beta = {T2, B};
    g = [0.8 * X1 - 0.5 * X2, 1.0];
  }
  process X3 {
    init = normal(0.0, 1.0);
    alpha = {X2, X3};
    beta = {T3, W};
    g = [0.7 * X2 - 0.5 * X3, 0.8];
  }
  process X4 {
    init = normal(0.0, 1.0);
    alpha = {X4};
    beta = {T4, X2};
    g = [-0.5 * X4, 0.9];
  }
  horizon 1.0;
}
"""

# Chain X1 -> X2 -> X3 plus an unrelated X4; every process has private
# integrators, so missing edges certify local independences.
CHAIN_SYSTEM = """
system {
  exogenous T1: time;
  exogenous T2: time;
  exogenous T3: time;
  exogenous T4: time;
  exogenous W1: brownian;
  exogenous W2: brownian;
  exogenous W3: brownian;
  exogenous W4: brownian;
  process X1 {
    init = normal(0.0, 1.0);
    alpha = {X1};
    beta = {T1, W1};
    g = [-0.5 * X1, 1.0];
  }
  process X2 {
    init = normal(0.0, 1.0);
    alpha = {X1, X2};
    beta = {T2, W2};
    g = [1.5 * X1 - 0.5 * X2, 1.0];
  }
  process X3 {
    init = normal(0.0, 1.0);
    alpha = {X2, X3};
    beta = {T3, W3};
    g = [1.5 * X2 - 0.5 * X3, 1.0];
  }
  process X4 {
    init = normal(0.0, 1.0);
    alpha = {X4};
    beta = {T4, W4};
    g = [-0.5 * X4, 1.0];
  }
  horizon 1.0;
}
"""

OU_SYSTEM = """
system {
  exogenous TT: time;
  exogenous W: brownian;
  process X {
    init = constant(2.0);
    alpha = {X};
    beta = {TT, W};
    g = [1.0 * (1.0 - X), 0.5];
  }
  horizon 1.0;
}
"""
OU_PARAMS = {"theta": 1.0, "mu": 1.0, "sigma": 0.5, "x0": 2.0, "T": 1.0}

POISSON_SYSTEM = """
system {
  exogenous N: poisson(3.0);
  process X {
    init = constant(0.0);
    alpha = {};
    beta = {N};
    g = [1.0];
  }
  horizon 1.0;
}
"""
POISSON_RATE = 3.0

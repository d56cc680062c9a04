"""Slow reference implementations and random generators used for checking.

Nothing here is used by the library itself; the acceptance suite and the
tests compare the fast algorithms against these.
"""

from __future__ import annotations

import itertools
import random
from typing import FrozenSet, Iterable, List, Optional, Tuple

from .dmg import ADAPTED, DMG, PREDICTABLE
from .sde import expr as E
from .sde.system import Dist, DriverSpec, ProcessSpec, SdeSystem, check_unique_solvability


# ---------------------------------------------------------------------------
# reachability
# ---------------------------------------------------------------------------

def reach(g: DMG) -> dict:
    """Reflexive-transitive closure of the directed part, by repeated
    squaring of the adjacency relation."""
    r = {v: {v} | set(g.children(v)) for v in g.nodes}
    changed = True
    while changed:
        changed = False
        for v in g.nodes:
            new = set().union(*(r[w] for w in r[v]))
            if new != r[v]:
                r[v] = new
                changed = True
    return r


def brute_sccs(g: DMG) -> set:
    r = reach(g)
    return {frozenset(w for w in g.nodes if w in r[v] and v in r[w]) for v in g.nodes}


def brute_ancestors(g: DMG, s: Iterable[str]) -> FrozenSet[str]:
    r = reach(g)
    s = set(s)
    return frozenset(v for v in g.nodes if r[v] & s)


# ---------------------------------------------------------------------------
# separation by walk enumeration
# ---------------------------------------------------------------------------

def _walk_edges(g: DMG, v: str):
    """(neighbour, edge id, head at v, head at neighbour) for every edge at v."""
    for w in sorted(g.children(v)):
        yield w, ("d", v, w), False, True
    for w in sorted(g.parents(v)):
        yield w, ("d", w, v), True, False
    for w in sorted(g.spouses(v)):
        yield w, ("b",) + tuple(sorted((v, w))), True, True


class WalkOracle:
    """Separation by walk enumeration on one graph.

    Walks are enumerated depth first and the blocking rules are applied to
    each interior node as the walk passes it. A walk that reaches a node in
    the same local situation as before (same arrival mark, same "tail
    leaving the strongly connected component" flag) is abandoned: cutting
    out the loop between the two visits leaves a shorter walk that is open
    whenever the long one is. Walks therefore have length at most 3|V|.
    """

    def __init__(self, g: DMG):
        self.g = g
        self.reach = reach(g)
        self.scc = {}
        for comp in brute_sccs(g):
            for v in comp:
                self.scc[v] = comp
        self.edges = {v: list(_walk_edges(g, v)) for v in g.nodes}

    def connected(self, a, b, c, sigma: bool = True) -> bool:
        a, b, c = set(a), set(b), set(c)
        if a & b:
            return True
        anc_c = {v for v in self.g.nodes if self.reach[v] & c}
        scc, edges = self.scc, self.edges

        def blocks(v, in_head, out_head, in_tail_out, out_tail_out):
            if in_head and out_head:
                return v not in anc_c
            if v not in c:
                return False
            if not sigma:
                return True
            # a tail at v on a walk edge leaving v's SCC makes v blockable
            return in_tail_out or out_tail_out

        def dfs(v, arrival, in_head, in_tail_out, seen):
            for w, eid, head_v, head_w in edges[v]:
                if arrival is not None:
                    out_tail_out = (not head_v) and w not in scc[v]
                    if blocks(v, in_head, head_v, in_tail_out, out_tail_out):
                        continue
                if w in b:
                    return True
                tail_out = (not head_w) and v not in scc[w]
                state = (w, head_w, tail_out)
                if state in seen:
                    continue
                seen.add(state)
                if dfs(w, eid, head_w, tail_out, seen):
                    return True
                seen.discard(state)
            return False

        return any(dfs(s, None, False, False, {(s, None, None)}) for s in sorted(a))


def brute_connected(g: DMG, a, b, c, sigma: bool = True) -> bool:
    """Is there a walk from ``a`` to ``b`` not blocked by ``c``?"""
    return WalkOracle(g).connected(a, b, c, sigma)


def brute_sigma_separated(g: DMG, a, b, c) -> bool:
    return not brute_connected(g, a, b, c, sigma=True)


def brute_d_separated(g: DMG, a, b, c) -> bool:
    return not brute_connected(g, a, b, c, sigma=False)


# ---------------------------------------------------------------------------
# random objects
# ---------------------------------------------------------------------------

def edge_slots(nodes: List[str]) -> List[Tuple[str, str, str]]:
    """Every possible edge: ("d", u, v) directed or ("b", u, v) with u < v."""
    slots = [("d", u, v) for u in nodes for v in nodes if u != v]
    slots += [("b", u, v) for u, v in itertools.combinations(nodes, 2)]
    return slots


def dmg_from_slots(nodes: List[str], chosen, deps=None) -> DMG:
    deps = deps or [PREDICTABLE] * len(chosen)
    directed = [(u, v, d) for (k, u, v), d in zip(chosen, deps) if k == "d"]
    bidirected = [(u, v, d) for (k, u, v), d in zip(chosen, deps) if k == "b"]
    return DMG(nodes, directed, bidirected)


def all_small_dmgs(n_nodes: int, max_edges: int):
    nodes = [f"V{i}" for i in range(n_nodes)]
    slots = edge_slots(nodes)
    for k in range(max_edges + 1):
        for chosen in itertools.combinations(slots, k):
            yield dmg_from_slots(nodes, chosen)


def random_dmg(rng: random.Random, n_nodes: int, p_dir: float = 0.3,
               p_bi: float = 0.15, adapted: float = 0.3) -> DMG:
    nodes = [f"V{i}" for i in range(n_nodes)]
    directed, bidirected = [], []
    for u in nodes:
        for v in nodes:
            if u != v and rng.random() < p_dir:
                directed.append((u, v, ADAPTED if rng.random() < adapted else PREDICTABLE))
    for u, v in itertools.combinations(nodes, 2):
        if rng.random() < p_bi:
            bidirected.append((u, v, ADAPTED if rng.random() < adapted else PREDICTABLE))
    return DMG(nodes, directed, bidirected)


def random_system(rng: random.Random, max_procs: int = 5, max_drivers: int = 3,
                  horizon: float = 1.0, solvable: bool = True,
                  max_tries: int = 1000) -> SdeSystem:
    """Random system with linear integrands; rejection-sampled to be
    uniquely solvable when ``solvable``."""
    kinds = ["brownian", "poisson", "time", "constant"]
    for _ in range(max_tries):
        n = rng.randint(1, max_procs)
        m = rng.randint(0, max_drivers)
        procs = [f"X{i + 1}" for i in range(n)]
        drivers = []
        for j in range(m):
            kind = rng.choice(kinds)
            drivers.append(DriverSpec(f"W{j + 1}", kind, 1.5 if kind == "poisson" else 0.0))
        names = procs + [d.name for d in drivers]
        specs = []
        for v in procs:
            alpha = sorted({u for u in names if rng.random() < 0.3} | ({v} if rng.random() < 0.7 else set()))
            beta = sorted(u for u in names if u != v and rng.random() < 0.25)
            gs = []
            for _u in beta:
                terms: E.Expr = E.Num(round(rng.uniform(-1, 1), 2))
                for x in [x for x in alpha if x in procs or x == v]:
                    terms = E.BinOp("+", terms, E.BinOp("*", E.Num(round(rng.uniform(-0.5, 0.5), 2)), E.Var(x)))
                gs.append(terms)
            init = Dist("normal", 0.0, 1.0) if rng.random() < 0.8 else Dist("constant", 0.0)
            specs.append(ProcessSpec(v, init, tuple(alpha), tuple(beta), tuple(gs),
                                     markov=rng.random() < 0.4))
        sys = SdeSystem(tuple(specs), tuple(drivers), horizon)
        if not solvable or check_unique_solvability(sys):
            return sys
    raise RuntimeError("could not sample a solvable system")


def random_tau(rng: random.Random, horizon: float = 1.0, max_points: int = 4,
               grid: int = 20) -> List[float]:
    k = rng.randint(0, max_points)
    pts = sorted(rng.sample(range(grid + 1), k))
    return [horizon * p / grid for p in pts]


def random_subset(rng: random.Random, items, max_size: Optional[int] = None):
    items = list(items)
    k = rng.randint(0, len(items) if max_size is None else min(max_size, len(items)))
    return sorted(rng.sample(items, k))

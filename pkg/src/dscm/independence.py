"""Independence models, local independence and do-calculus preconditions."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from . import dmg
from .dmg import ADAPTED, DMG, ENDOGENOUS, INTERVENTION, PREDICTABLE, GraphError, NodeId

Triple = Tuple[FrozenSet[str], FrozenSet[str], FrozenSet[str]]

SEP = "_||_"


def _key(a, b, c) -> Triple:
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    if sorted(b) < sorted(a):
        a, b = b, a
    return a, b, c


class InconsistentModel(ValueError):
    pass


@dataclass
class IndependenceModel:
    """Separation (True) / dependence (False) judgements on node sets.

    Statements are stored symmetrically: ``(A, B, C)`` and ``(B, A, C)``
    share one entry. With ``complete=True`` every triple over singletons
    with ``|C| <= max_cond`` not recorded as separated counts as dependent.
    """

    universe: Tuple[str, ...]
    max_cond: int
    statements: Dict[Triple, bool] = field(default_factory=dict)
    complete: bool = True

    def add(self, a, b, c, separated: bool):
        k = _key(a, b, c)
        old = self.statements.get(k)
        if old is not None and old != separated:
            raise InconsistentModel(
                f"{_fmt_triple(k)} recorded both as separated and as dependent")
        bad = (k[0] | k[1] | k[2]) - set(self.universe)
        if bad:
            raise GraphError(f"statement mentions nodes outside the universe: {sorted(bad)}")
        self.statements[k] = separated

    def separated(self, a, b, c) -> bool:
        k = _key(a, b, c)
        if k in self.statements:
            return self.statements[k]
        if self.complete and len(k[2]) <= self.max_cond:
            return False
        raise KeyError(f"no judgement for {_fmt_triple(k)}")

    def separations(self) -> List[Triple]:
        return sorted((k for k, v in self.statements.items() if v), key=_sort_key)

    def __eq__(self, other):
        if not isinstance(other, IndependenceModel):
            return NotImplemented
        return (set(self.universe) == set(other.universe)
                and set(self.separations()) == set(other.separations()))

    def to_text(self) -> str:
        lines = [f"# nodes: {','.join(self.universe)}", f"# max_cond: {self.max_cond}"]
        for k in self.separations():
            lines.append(_fmt_triple(k))
        if not self.complete:
            for k in sorted((k for k, v in self.statements.items() if not v), key=_sort_key):
                lines.append("not " + _fmt_triple(k))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "IndependenceModel":
        universe: List[str] = []
        max_cond = None
        rows = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                key = key.strip()
                if key == "nodes":
                    universe = dmg.split_names(val)
                elif key == "max_cond":
                    max_cond = int(val)
                continue
            sep = True
            if line.startswith("not "):
                sep, line = False, line[4:]
            a, _, right = line.partition(SEP)
            b, _, cond = right.partition("|")
            if not b.strip():
                raise ValueError(f"cannot parse statement: {raw!r}")
            rows.append((_names(a), _names(b), _names(cond), sep))
        if not universe:
            universe = sorted({n for r in rows for part in r[:3] for n in part})
        if max_cond is None:
            max_cond = max(len(universe) - 2, 0)
        has_dep = any(not r[3] for r in rows)
        im = cls(tuple(universe), max_cond, complete=not has_dep)
        for a, b, c, sep in rows:
            im.add(a, b, c, sep)
        return im


def _names(text: str) -> List[str]:
    return dmg.split_names(text)


def _sort_key(k: Triple):
    return (len(k[0]) + len(k[1]), sorted(k[0]), sorted(k[1]), len(k[2]), sorted(k[2]))


def _fmt_triple(k: Triple) -> str:
    a, b, c = (",".join(sorted(s)) for s in k)
    return f"{a} {SEP} {b} | {c}" if c else f"{a} {SEP} {b} |"


def enumerate_im(g: DMG, max_set_size: Optional[int] = None,
                 nodes: Optional[Sequence[str]] = None, max_nodes: int = 10,
                 sets: bool = False, sigma: bool = True) -> IndependenceModel:
    """All separations between distinct nodes (or disjoint node sets with
    ``sets=True``) given conditioning sets of at most ``max_set_size``
    other nodes."""
    universe = tuple(sorted(nodes if nodes is not None else g.nodes))
    if len(universe) > max_nodes:
        raise GraphError(f"{len(universe)} nodes exceeds the enumeration limit of {max_nodes}")
    if max_set_size is None:
        max_set_size = max(len(universe) - 2, 0)
    test = dmg.sigma_separated if sigma else dmg.d_separated
    im = IndependenceModel(universe, max_set_size, complete=not sets)
    if sets:
        blocks = [frozenset(s) for r in range(1, len(universe)) for s in combinations(universe, r)]
        pairs = [(a, b) for a, b in combinations(blocks, 2) if not a & b]
    else:
        pairs = [(frozenset([a]), frozenset([b])) for a, b in combinations(universe, 2)]
    for a, b in pairs:
        rest = [n for n in universe if n not in a and n not in b]
        for r in range(min(max_set_size, len(rest)) + 1):
            for c in combinations(rest, r):
                sep = test(g, a, b, c)
                if sep or sets:
                    im.add(a, b, c, sep)
    return im


# ---------------------------------------------------------------------------
# local independence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegratorReport:
    passes: bool
    violations: Tuple[str, ...]

    def __bool__(self):
        return self.passes


def integrators(g: DMG) -> Dict[str, FrozenSet[str]]:
    """beta(v) read off the graph: parents feeding ``v`` through adapted edges."""
    return {v: frozenset(u for u in g.parents(v) if g.dependence(u, v) == ADAPTED)
            for v in g.endogenous()}


def check_independent_integrators(g: DMG, sys=None) -> IntegratorReport:
    """Every integrator exogenous and no integrator shared by two processes."""
    viol: List[str] = []
    beta = integrators(g)
    if sys is not None:
        for p in sys.processes:
            if p.name in beta:
                beta[p.name] = beta[p.name] | frozenset(p.beta)
    exo = set(g.exogenous())
    if sys is not None:
        exo |= set(sys.driver_names)
    for v in sorted(beta):
        for u in sorted(beta[v]):
            if u not in exo:
                viol.append(f"{v}: integrator {u} is endogenous")
    for v, w in combinations(sorted(beta), 2):
        shared = beta[v] & beta[w]
        if shared:
            viol.append(f"{v}, {w}: share integrator(s) {', '.join(sorted(shared))}")
    for u, v, dep in g.bidirected_edges:
        if dep == ADAPTED:
            viol.append(f"{u} <-> {v}: adapted confounding")
    return IntegratorReport(not viol, tuple(viol))


@dataclass(frozen=True)
class LocalIndependenceGraph:
    graph: DMG
    guarantee: bool
    report: IntegratorReport

    def certificates(self) -> List[Tuple[str, str]]:
        """Pairs (a, b), a != b, with no edge a -> b: under the guarantee,
        X_a does not locally affect X_b given all other processes."""
        g = self.graph
        return [(a, b) for a in g.nodes for b in g.nodes
                if a != b and not g.has_edge(a, b)]


def local_independence_graph(g: DMG, sys=None) -> LocalIndependenceGraph:
    """G(M) of a collapsed model with a flag telling whether its missing
    edges are guaranteed local independences."""
    report = check_independent_integrators(g, sys)
    out = dmg.to_dmg(g) if g.exogenous() else g
    return LocalIndependenceGraph(out, report.passes, report)


class GuaranteeError(ValueError):
    pass


@dataclass(frozen=True)
class LocalIndepStatement:
    a: FrozenSet[str]
    b: FrozenSet[str]
    c: FrozenSet[str]
    holds: bool

    def __post_init__(self):
        if not self.b:
            raise ValueError("target set must be nonempty")


def sigma_li_query(lig: LocalIndependenceGraph, a, b, c=()) -> LocalIndepStatement:
    """Certify ``X_a -/-> X_b | X_c`` by sigma-separation in G(M)."""
    if not lig.guarantee:
        raise GuaranteeError(
            "sigma-separation certifies local independence only under independent "
            "integrators; violations: " + "; ".join(lig.report.violations))
    holds = dmg.sigma_separated(lig.graph, a, b, c)
    return LocalIndepStatement(frozenset(a), frozenset(b), frozenset(c), holds)


# ---------------------------------------------------------------------------
# do-calculus
# ---------------------------------------------------------------------------

def intervention_node(x: str) -> str:
    return f"I_{x}"


def with_intervention_nodes(g: DMG, xs: Iterable[str]) -> DMG:
    nodes = g.node_ids()
    edges = list(g.directed_edges)
    for x in sorted(set(xs)):
        i = intervention_node(x)
        if i in g:
            raise GraphError(f"node name {i!r} already in use")
        nodes.append(NodeId(i, INTERVENTION))
        edges.append((i, x, PREDICTABLE))
    return g.replace(nodes=nodes, directed=edges)


def docalc_check(g: DMG, rule: int, x, y, z=(), w=()) -> bool:
    """sigma-separation precondition of do-calculus rule 1, 2 or 3.

    ``do(W)`` is graph surgery on ``g`` (edges into W removed) with W
    added to the conditioning set.
    """
    x, y, z, w = (frozenset(s) for s in (x, y, z, w))
    sets = {"x": x, "y": y, "z": z, "w": w}
    for (n1, s1), (n2, s2) in combinations(sets.items(), 2):
        if s1 & s2:
            raise GraphError(f"sets {n1} and {n2} overlap: {sorted(s1 & s2)}")
    for n in x | y | z | w:
        if n not in g:
            raise GraphError(f"unknown node {n!r}")
        if g.role(n) != ENDOGENOUS:
            raise GraphError(f"{n} is not endogenous")
    if not x or not y:
        raise GraphError("x and y must be nonempty")
    h = dmg.intervene_graph(g, w) if w else g
    if rule == 1:
        return dmg.sigma_separated(h, y, x, z | w)
    ix = [intervention_node(v) for v in sorted(x)]
    h = with_intervention_nodes(h, x)
    if rule == 2:
        return dmg.sigma_separated(h, y, ix, x | z | w)
    if rule == 3:
        return dmg.sigma_separated(h, y, ix, z | w)
    raise GraphError(f"unknown do-calculus rule {rule!r}")

"""Directed mixed graphs with per-edge dependence kinds.

A :class:`DMG` holds directed edges ``u -> v`` and bidirected edges
``u <-> v``. Every edge carries a dependence kind, either ``"predictable"``
or ``"adapted"``; adapted dependence allows instantaneous effects and is
rendered in red. Nodes have a role: endogenous, exogenous or intervention.

The same structure is used for augmented graphs (exogenous nodes explicit),
for plain mixed graphs (latent confounding as bidirected edges) and for
time-split graphs whose nodes are ``(process, piece)`` pairs.
"""

from __future__ import annotations

import re
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

ENDOGENOUS = "endogenous"
EXOGENOUS = "exogenous"
INTERVENTION = "intervention"
ROLES = (ENDOGENOUS, EXOGENOUS, INTERVENTION)

PREDICTABLE = "predictable"
ADAPTED = "adapted"
DEPENDENCES = (PREDICTABLE, ADAPTED)


class GraphError(ValueError):
    """Raised for malformed graphs and queries on unknown nodes."""


@dataclass(frozen=True)
class NodeId:
    name: str
    role: str = ENDOGENOUS
    process: Optional[str] = None
    piece: Any = None
    # initial-value node of ``process``
    init: bool = False

    def __post_init__(self):
        if self.role not in ROLES:
            raise GraphError(f"unknown node role {self.role!r}")


def _merge_dep(a: Optional[str], b: str) -> str:
    if a == ADAPTED or b == ADAPTED:
        return ADAPTED
    return PREDICTABLE


def _as_node(n) -> NodeId:
    if isinstance(n, NodeId):
        return n
    if isinstance(n, str):
        return NodeId(n)
    raise GraphError(f"cannot interpret {n!r} as a node")


def _as_edge(e) -> Tuple[str, str, str]:
    if len(e) == 2:
        return e[0], e[1], PREDICTABLE
    u, v, dep = e
    if dep not in DEPENDENCES:
        raise GraphError(f"unknown dependence kind {dep!r}")
    return u, v, dep


class DMG:
    """Immutable directed mixed graph.

    Parameters
    ----------
    nodes : iterable of NodeId or str
        Plain strings become endogenous nodes.
    directed, bidirected : iterable of ``(u, v)`` or ``(u, v, dependence)``
        Repeated edges collapse to one edge per endpoint pair; adapted wins
        over predictable.
    meta : mapping, optional
        Free-form annotations (e.g. ``simple``, ``projection``). Not part of
        equality.
    """

    def __init__(self, nodes: Iterable = (), directed: Iterable = (),
                 bidirected: Iterable = (), meta: Optional[Mapping] = None):
        self._nodes: Dict[str, NodeId] = {}
        for n in nodes:
            node = _as_node(n)
            if node.name in self._nodes and self._nodes[node.name] != node:
                raise GraphError(f"duplicate node {node.name!r}")
            self._nodes[node.name] = node
        self._dir: Dict[Tuple[str, str], str] = {}
        self._bi: Dict[FrozenSet[str], str] = {}
        for e in directed:
            u, v, dep = _as_edge(e)
            self._check_endpoints(u, v)
            self._dir[(u, v)] = _merge_dep(self._dir.get((u, v)), dep)
        for e in bidirected:
            u, v, dep = _as_edge(e)
            self._check_endpoints(u, v)
            key = frozenset((u, v))
            self._bi[key] = _merge_dep(self._bi.get(key), dep)
        self.meta: Dict[str, Any] = dict(meta or {})

        self._pa: Dict[str, set] = defaultdict(set)
        self._ch: Dict[str, set] = defaultdict(set)
        self._sp: Dict[str, set] = defaultdict(set)
        for u, v in self._dir:
            self._ch[u].add(v)
            self._pa[v].add(u)
        for key in self._bi:
            u, v = tuple(key)
            self._sp[u].add(v)
            self._sp[v].add(u)
        self._validate_roles()
        self._cache: Dict[str, Any] = {}  # derived structure; safe as edges never change

    def _check_endpoints(self, u, v):
        for x in (u, v):
            if x not in self._nodes:
                raise GraphError(f"edge endpoint {x!r} is not a node")
        if u == v:
            raise GraphError(f"self-loop on {u!r}")

    def _validate_roles(self):
        for name, node in self._nodes.items():
            if node.role == EXOGENOUS and (self._pa[name] or self._sp[name]):
                raise GraphError(f"exogenous node {name!r} has incoming edges")
            if node.role == INTERVENTION:
                if self._pa[name] or self._sp[name] or len(self._ch[name]) != 1:
                    raise GraphError(
                        f"intervention node {name!r} must have exactly one outgoing edge")

    # -- accessors -----------------------------------------------------
    @property
    def nodes(self) -> Tuple[str, ...]:
        return tuple(sorted(self._nodes))

    def node(self, name: str) -> NodeId:
        try:
            return self._nodes[name]
        except KeyError:
            raise GraphError(f"unknown node {name!r}") from None

    def node_ids(self) -> List[NodeId]:
        return [self._nodes[n] for n in self.nodes]

    def __contains__(self, name) -> bool:
        return name in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def role(self, name: str) -> str:
        return self.node(name).role

    def endogenous(self) -> Tuple[str, ...]:
        return tuple(n for n in self.nodes if self._nodes[n].role == ENDOGENOUS)

    def exogenous(self) -> Tuple[str, ...]:
        return tuple(n for n in self.nodes if self._nodes[n].role == EXOGENOUS)

    @property
    def directed_edges(self) -> List[Tuple[str, str, str]]:
        return sorted((u, v, d) for (u, v), d in self._dir.items())

    @property
    def bidirected_edges(self) -> List[Tuple[str, str, str]]:
        out = []
        for key, d in self._bi.items():
            u, v = sorted(key)
            out.append((u, v, d))
        return sorted(out)

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self._dir

    def has_bidirected(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self._bi

    def dependence(self, u: str, v: str, bidirected: bool = False) -> str:
        if bidirected:
            return self._bi[frozenset((u, v))]
        return self._dir[(u, v)]

    def parents(self, v: str) -> FrozenSet[str]:
        self.node(v)
        return frozenset(self._pa.get(v, ()))

    def children(self, v: str) -> FrozenSet[str]:
        self.node(v)
        return frozenset(self._ch.get(v, ()))

    def spouses(self, v: str) -> FrozenSet[str]:
        self.node(v)
        return frozenset(self._sp.get(v, ()))

    def is_cyclic(self) -> bool:
        return any(len(c) > 1 for c in scc_partition(self))

    # -- derived graphs ---------------------------------------------------
    def replace(self, nodes=None, directed=None, bidirected=None, meta=None) -> "DMG":
        return DMG(
            self.node_ids() if nodes is None else nodes,
            self.directed_edges if directed is None else directed,
            self.bidirected_edges if bidirected is None else bidirected,
            self.meta if meta is None else meta,
        )

    def remove_nodes(self, drop: Iterable[str]) -> "DMG":
        drop = set(drop)
        return DMG(
            [n for n in self.node_ids() if n.name not in drop],
            [e for e in self.directed_edges if e[0] not in drop and e[1] not in drop],
            [e for e in self.bidirected_edges if e[0] not in drop and e[1] not in drop],
            self.meta,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, DMG):
            return NotImplemented
        return (self._roles() == other._roles() and self._dir == other._dir
                and self._bi == other._bi)

    def _roles(self) -> Dict[str, str]:
        # process/piece annotations are bookkeeping, not graph structure
        return {k: n.role for k, n in self._nodes.items()}

    def __hash__(self):
        return hash((frozenset(self._roles().items()), frozenset(self._dir.items()),
                     frozenset(self._bi.items())))

    def __repr__(self) -> str:
        return (f"DMG(nodes={len(self._nodes)}, directed={len(self._dir)}, "
                f"bidirected={len(self._bi)})")


# ---------------------------------------------------------------------------
# strongly connected components and ancestry
# ---------------------------------------------------------------------------

def scc_partition(g: DMG) -> List[FrozenSet[str]]:
    """SCCs of the directed part of ``g`` in a topological order of the
    condensation (sources first). Bidirected edges are ignored."""
    if "scc" not in g._cache:
        g._cache["scc"] = _tarjan(g)
    return list(g._cache["scc"])


def _tarjan(g: DMG) -> List[FrozenSet[str]]:
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    on_stack = set()
    stack: List[str] = []
    comps: List[FrozenSet[str]] = []
    counter = 0
    succ = {v: sorted(g._ch.get(v, ())) for v in g.nodes}

    for root in g.nodes:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            for j in range(i, len(succ[v])):
                w = succ[v][j]
                if w not in index:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    comps.reverse()
    return comps


def scc_map(g: DMG) -> Dict[str, FrozenSet[str]]:
    if "scc_map" not in g._cache:
        g._cache["scc_map"] = {v: comp for comp in scc_partition(g) for v in comp}
    return dict(g._cache["scc_map"])


def _check_nodes(g: DMG, s: Iterable[str]) -> FrozenSet[str]:
    s = frozenset(s)
    for v in s:
        if v not in g:
            raise GraphError(f"unknown node {v!r}")
    return s


def ancestors(g: DMG, s: Iterable[str]) -> FrozenSet[str]:
    """Anc(s), including ``s`` itself."""
    s = _check_nodes(g, s)
    seen = set(s)
    queue = deque(s)
    while queue:
        v = queue.popleft()
        for p in g._pa.get(v, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return frozenset(seen)


def descendants(g: DMG, s: Iterable[str]) -> FrozenSet[str]:
    s = _check_nodes(g, s)
    seen = set(s)
    queue = deque(s)
    while queue:
        v = queue.popleft()
        for c in g._ch.get(v, ()):
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# separation
# ---------------------------------------------------------------------------

ARROW = ">"
TAIL = "-"


def incident_edges(g: DMG, v: str):
    """``(w, mark_at_v, mark_at_w)`` for every edge at ``v``."""
    inc = g._cache.setdefault("incident", {})
    if v not in inc:
        inc[v] = ([(w, TAIL, ARROW) for w in sorted(g._ch.get(v, ()))]
                  + [(w, ARROW, TAIL) for w in sorted(g._pa.get(v, ()))]
                  + [(w, ARROW, ARROW) for w in sorted(g._sp.get(v, ()))])
    return inc[v]


def _connected(g: DMG, a, b, c, sigma: bool) -> bool:
    a = _check_nodes(g, a)
    b = _check_nodes(g, b)
    c = _check_nodes(g, c)
    if a & b:
        return True
    anc_c = ancestors(g, c)
    sc = g._cache.get("scc_map") or scc_map(g)
    # state: (node, arrived with arrowhead, arrival edge is a tail at the
    # node pointing to a neighbour outside its SCC)
    seen = set()
    queue = deque()

    def push(state):
        if state not in seen:
            seen.add(state)
            queue.append(state)

    for s in sorted(a):
        for w, m_v, m_w in incident_edges(g, s):
            push((w, m_w == ARROW, m_w == TAIL and s not in sc[w]))
    while queue:
        v, head_in, tail_out = queue.popleft()
        if v in b:
            return True
        for w, m_v, m_w in incident_edges(g, v):
            if head_in and m_v == ARROW:
                if v not in anc_c:
                    continue
            elif v in c:
                if not sigma:
                    continue
                if tail_out or (m_v == TAIL and w not in sc[v]):
                    continue
            push((w, m_w == ARROW, m_w == TAIL and v not in sc[w]))
    return False


def sigma_separated(g: DMG, a: Iterable[str], b: Iterable[str],
                    c: Iterable[str] = ()) -> bool:
    """True iff every walk between ``a`` and ``b`` is sigma-blocked by ``c``.

    A collider blocks unless it is an ancestor of ``c``; a non-collider in
    ``c`` blocks only if it has a child on the walk outside its own
    strongly connected component. Sets need not be disjoint; a node shared
    by ``a`` and ``b`` is connected to itself by the trivial walk.
    """
    return not _connected(g, a, b, c, sigma=True)


def d_separated(g: DMG, a: Iterable[str], b: Iterable[str],
                c: Iterable[str] = ()) -> bool:
    """As :func:`sigma_separated` but every non-collider in ``c`` blocks."""
    return not _connected(g, a, b, c, sigma=False)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def _reach_through(g: DMG, start: str, drop: FrozenSet[str], forward: bool):
    """Nodes reachable from ``start`` along directed edges whose
    intermediate nodes all lie in ``drop``. Returns ``{node: all_adapted}``
    where the flag is True if some such path uses only adapted edges."""
    out: Dict[str, bool] = {}
    seen = set()
    queue = deque([(start, True)])
    while queue:
        v, flag = queue.popleft()
        nbrs = g._ch.get(v, ()) if forward else g._pa.get(v, ())
        for w in nbrs:
            dep = g._dir[(v, w)] if forward else g._dir[(w, v)]
            f = flag and dep == ADAPTED
            out[w] = out.get(w, False) or f
            if w in drop and (w, f) not in seen:
                seen.add((w, f))
                queue.append((w, f))
    return out


def latent_project(g: DMG, drop: Iterable[str]) -> DMG:
    """Latent projection of ``g`` onto the nodes not in ``drop``.

    Directed ``u -> v`` is kept when a directed path from ``u`` to ``v``
    runs through dropped nodes only; it is adapted if some such path is
    adapted throughout. ``u <-> v`` appears when a path through dropped
    non-colliders has arrowheads at both ``u`` and ``v``. The result may
    contain edges the true marginal model lacks, never fewer.
    """
    drop = _check_nodes(g, drop)
    if not drop:
        return g.replace()
    keep = [n for n in g.nodes if n not in drop]
    directed = []
    for u in keep:
        for w, f in _reach_through(g, u, drop, forward=True).items():
            if w not in drop and w != u:
                directed.append((u, w, ADAPTED if f else PREDICTABLE))

    # tops[x]: dropped nodes with a directed path into x through drop
    tops = {}
    for x in keep:
        tops[x] = {l: f for l, f in _reach_through(g, x, drop, forward=False).items()
                   if l in drop}
    bidirected = []
    keep_set = set(keep)
    for i, u in enumerate(keep):
        for v in keep[i + 1:]:
            dep = None
            for l, fu in tops[u].items():
                if l in tops[v]:
                    dep = _merge_dep(dep, ADAPTED if fu and tops[v][l] else PREDICTABLE)
            src_u = dict(tops[u])
            src_u[u] = True
            src_v = dict(tops[v])
            src_v[v] = True
            for x, fx in src_u.items():
                for y in g._sp.get(x, ()):
                    if y in src_v and not (x == u and y == v):
                        fb = fx and src_v[y] and g._bi[frozenset((x, y))] == ADAPTED
                        dep = _merge_dep(dep, ADAPTED if fb else PREDICTABLE)
            if g.has_bidirected(u, v):
                dep = _merge_dep(dep, g.dependence(u, v, bidirected=True))
            if dep is not None:
                bidirected.append((u, v, dep))
    meta = dict(g.meta)
    meta["projection"] = "over-approximation"
    return DMG([g.node(n) for n in keep if n in keep_set], directed, bidirected, meta)


def to_dmg(g: DMG) -> DMG:
    """Drop exogenous nodes; every pair of endogenous children of a common
    exogenous node gets a bidirected edge (adapted iff both edges are)."""
    exo = set(g.exogenous())
    bidirected = list(g.bidirected_edges)
    for k in sorted(exo):
        kids = sorted(c for c in g._ch.get(k, ()) if c not in exo)
        for i, u in enumerate(kids):
            for v in kids[i + 1:]:
                both = g._dir[(k, u)] == ADAPTED and g._dir[(k, v)] == ADAPTED
                bidirected.append((u, v, ADAPTED if both else PREDICTABLE))
    keep = [n for n in g.node_ids() if n.name not in exo]
    directed = [e for e in g.directed_edges if e[0] not in exo]
    return DMG(keep, directed, bidirected, g.meta)


def intervene_graph(g: DMG, targets: Iterable[str]) -> DMG:
    """Remove every edge with an arrowhead at a target."""
    t = _check_nodes(g, targets)
    for v in t:
        if g.role(v) != ENDOGENOUS:
            raise GraphError(f"intervention target {v!r} is not endogenous")
    return g.replace(
        directed=[e for e in g.directed_edges if e[1] not in t],
        bidirected=[e for e in g.bidirected_edges if e[0] not in t and e[1] not in t],
    )


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------

def _q(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def export_dot(g: DMG, name: str = "G") -> str:
    """Graphviz DOT. Adapted edges get ``color=red``; bidirected edges
    ``dir=both``; non-endogenous nodes carry a ``role`` attribute."""
    lines = [f"digraph {name} {{"]
    for n in g.node_ids():
        if n.role == ENDOGENOUS:
            lines.append(f"  {_q(n.name)};")
        else:
            lines.append(f"  {_q(n.name)} [role={n.role}];")
    for u, v, d in g.directed_edges:
        attr = " [color=red]" if d == ADAPTED else ""
        lines.append(f"  {_q(u)} -> {_q(v)}{attr};")
    for u, v, d in g.bidirected_edges:
        attr = "dir=both, color=red" if d == ADAPTED else "dir=both"
        lines.append(f"  {_q(u)} -> {_q(v)} [{attr}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_DOT_ID = r'"((?:[^"\\]|\\.)*)"|([A-Za-z0-9_.^]+)'
_DOT_EDGE = re.compile(rf'^\s*(?:{_DOT_ID})\s*->\s*(?:{_DOT_ID})\s*(?:\[(.*)\])?\s*;?\s*$')
_DOT_NODE = re.compile(rf'^\s*(?:{_DOT_ID})\s*(?:\[(.*)\])?\s*;?\s*$')


def _dot_attrs(text: Optional[str]) -> Dict[str, str]:
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" in part:
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip().strip('"')
    return out


def parse_dot(text: str) -> DMG:
    """Read the DOT subset written by :func:`export_dot`."""
    body = text.strip()
    m = re.match(r"^\s*digraph\s*[^{]*\{(.*)\}\s*$", body, re.S)
    if not m:
        raise GraphError("expected 'digraph NAME { ... }'")
    nodes: Dict[str, str] = {}
    directed, bidirected = [], []
    for raw in re.split(r"[;\n]", m.group(1)):
        line = raw.strip()
        if not line or line.startswith("//") or line.startswith("#"):
            continue
        em = _DOT_EDGE.match(line)
        if em:
            u = em.group(1) if em.group(1) is not None else em.group(2)
            v = em.group(3) if em.group(3) is not None else em.group(4)
            attrs = _dot_attrs(em.group(5))
            dep = ADAPTED if attrs.get("color") == "red" else PREDICTABLE
            nodes.setdefault(u, ENDOGENOUS)
            nodes.setdefault(v, ENDOGENOUS)
            (bidirected if attrs.get("dir") == "both" else directed).append((u, v, dep))
            continue
        nm = _DOT_NODE.match(line)
        if nm:
            n = nm.group(1) if nm.group(1) is not None else nm.group(2)
            if n in ("graph", "node", "edge"):
                continue
            nodes[n] = _dot_attrs(nm.group(3)).get("role", ENDOGENOUS)
            continue
        raise GraphError(f"cannot parse DOT statement {line!r}")
    return DMG([NodeId(n, r) for n, r in nodes.items()], directed, bidirected)


def split_names(text: str) -> List[str]:
    """Split a comma- or space-separated name list. Commas inside an
    interval label such as ``X^(0,T]`` stay part of the name."""
    out, cur, depth = [], [], 0
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(depth - 1, 0)
        if depth == 0 and (ch == "," or ch.isspace()):
            if cur:
                out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def export_edges(g: DMG) -> str:
    """Line-oriented edge list: ``u -> v [adapted]`` / ``u <-> v``.

    Isolated and non-endogenous nodes are declared with ``node NAME [role]``.
    """
    lines = []
    touched = {x for e in g.directed_edges + g.bidirected_edges for x in e[:2]}
    for n in g.node_ids():
        if n.role != ENDOGENOUS:
            lines.append(f"node {n.name} {n.role}")
        elif n.name not in touched:
            lines.append(f"node {n.name}")
    for u, v, d in g.directed_edges:
        lines.append(f"{u} -> {v}" + (" [adapted]" if d == ADAPTED else ""))
    for u, v, d in g.bidirected_edges:
        lines.append(f"{u} <-> {v}" + (" [adapted]" if d == ADAPTED else ""))
    return "\n".join(lines) + ("\n" if lines else "")


_EDGE_LINE = re.compile(r"^(\S+)\s+(->|<->)\s+(\S+)(?:\s+\[(adapted|predictable)\])?$")


def parse_edges(text: str) -> DMG:
    nodes: Dict[str, str] = {}
    directed, bidirected = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("node "):
            parts = line.split()
            role = parts[2] if len(parts) > 2 else ENDOGENOUS
            if len(parts) > 3 or role not in ROLES:
                raise GraphError(f"line {lineno}: bad node declaration {raw!r}")
            nodes[parts[1]] = role
            continue
        m = _EDGE_LINE.match(line)
        if not m:
            raise GraphError(f"line {lineno}: cannot parse edge {raw!r}")
        u, arrow, v, dep = m.groups()
        nodes.setdefault(u, ENDOGENOUS)
        nodes.setdefault(v, ENDOGENOUS)
        (directed if arrow == "->" else bidirected).append((u, v, dep or PREDICTABLE))
    return DMG([NodeId(n, r) for n, r in nodes.items()], directed, bidirected)

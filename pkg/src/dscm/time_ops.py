"""Evaluation partitions and the time-split / subsample / collapse transforms.

A time-split graph has one node per (process, piece). Pieces are intervals
or points of the time axis ``[0, T]``; node names are ``"{process}^{label}"``
(``X1^(0,s)``, ``X1^s``). A piece equal to the whole axis keeps the bare
process name, so splitting at no points returns the input graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .dmg import (ADAPTED, DMG, ENDOGENOUS, EXOGENOUS, PREDICTABLE, GraphError,
                  NodeId, intervene_graph, latent_project)

__all__ = [
    "Piece", "EvalPartition", "SplitGraph", "parse_tau", "split_partition",
    "time_split_graph", "subsample_graph", "collapse_graph", "attach_pieces",
    "marginalise_graph", "intervene_graph", "lt", "le",
]


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool
    lo_label: str
    hi_label: str

    @classmethod
    def point(cls, t: float, label: str) -> "Piece":
        return cls(t, t, True, True, label, label)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    @property
    def label(self) -> str:
        if self.is_point:
            return self.lo_label
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo_label},{self.hi_label}{right}"

    def contains(self, t: float) -> bool:
        above = t > self.lo or (t == self.lo and self.lo_closed)
        below = t < self.hi or (t == self.hi and self.hi_closed)
        return above and below

    def overlaps(self, other: "Piece") -> bool:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo < hi:
            return True
        if lo > hi:
            return False
        return self.contains(lo) and other.contains(lo)

    def sort_key(self):
        return (self.lo, not self.lo_closed, self.hi, self.hi_closed)

    def __str__(self):
        return self.label


def lt(a: Piece, b: Piece) -> bool:
    """Some time in ``a`` is strictly before some time in ``b``."""
    return a.lo < b.hi


def le(a: Piece, b: Piece) -> bool:
    """Some time in ``a`` is at or before some time in ``b``."""
    return lt(a, b) or (a.lo == b.hi and a.lo_closed and b.hi_closed)


@dataclass(frozen=True)
class EvalPartition:
    pieces: Tuple[Piece, ...]
    horizon: float = 1.0
    horizon_label: str = "T"

    @classmethod
    def whole(cls, horizon: float = 1.0, label: str = "T") -> "EvalPartition":
        return cls((Piece(0.0, horizon, True, True, "0", label),), horizon, label)

    def __post_init__(self):
        ps = self.pieces
        for a, b in zip(ps, ps[1:]):
            if a.hi > b.lo or (a.hi == b.lo and a.hi_closed and b.lo_closed):
                raise GraphError(f"pieces {a} and {b} overlap or are out of order")

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self):
        return len(self.pieces)

    @property
    def labels(self) -> List[str]:
        return [p.label for p in self.pieces]

    def covers(self) -> bool:
        return covers(self.pieces, self.horizon)


def covers(pieces: Iterable[Piece], horizon: float) -> bool:
    ps = sorted(pieces, key=Piece.sort_key)
    if not ps or ps[0].lo != 0 or not ps[0].lo_closed:
        return False
    for a, b in zip(ps, ps[1:]):
        if a.hi != b.lo or a.hi_closed == b.lo_closed:
            return False
    return ps[-1].hi == horizon and ps[-1].hi_closed


def _fmt(t: float) -> str:
    return f"{t:g}"


def parse_tau(text: Union[str, Sequence], horizon: float = 1.0,
              horizon_label: str = "T") -> List[Tuple[str, float]]:
    """Parse split points such as ``"0,s,t"`` or ``"0,s=0.25,0.5"``.

    Numbers label themselves; ``T`` is the horizon; a bare name without a
    binding is placed evenly between its bound neighbours in listed order.
    """
    items = [x.strip() for x in text.split(",") if x.strip()] if isinstance(text, str) \
        else [str(x) for x in text]
    raw: List[Tuple[str, Optional[float]]] = []
    for item in items:
        if "=" in item:
            name, val = (s.strip() for s in item.split("=", 1))
            raw.append((name, float(val)))
        elif item == horizon_label:
            raw.append((item, horizon))
        elif re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", item):
            raw.append((item, None))
        else:
            try:
                v = float(item)
            except ValueError:
                raise GraphError(f"bad split point {item!r}") from None
            raw.append((_fmt(v) if item != "0" else "0", v))
    # fill unbound names between bound neighbours
    out: List[Tuple[str, float]] = []
    i = 0
    while i < len(raw):
        if raw[i][1] is not None:
            out.append((raw[i][0], raw[i][1]))
            i += 1
            continue
        j = i
        while j < len(raw) and raw[j][1] is None:
            j += 1
        left = out[-1][1] if out else 0.0
        right = raw[j][1] if j < len(raw) else horizon
        n = j - i
        for k in range(n):
            out.append((raw[i + k][0], left + (right - left) * (k + 1) / (n + 1)))
        i = j
    vals = [v for _, v in out]
    if len(set(vals)) != len(vals) or len({n for n, _ in out}) != len(out):
        raise GraphError("split points must be distinct")
    if vals != sorted(vals):
        raise GraphError("split points must be listed in increasing time order")
    return out


def _as_points(tau, horizon: float) -> List[Tuple[str, float]]:
    if isinstance(tau, str):
        return parse_tau(tau, horizon)
    out = []
    for t in tau:
        if isinstance(t, tuple):
            out.append((str(t[0]), float(t[1])))
        else:
            out.append(("0" if t == 0 else _fmt(float(t)), float(t)))
    if len({v for _, v in out}) != len(out):
        raise GraphError("split points must be distinct")
    return out


def split_partition(tau, base: Optional[EvalPartition] = None) -> EvalPartition:
    """Refine ``base`` so that each split point becomes its own piece."""
    base = base or EvalPartition.whole()
    pieces = list(base.pieces)
    for label, t in _as_points(tau, base.horizon):
        if not 0 <= t <= base.horizon:
            raise GraphError(f"split point {label}={t} outside [0, {base.horizon}]")
        for i, p in enumerate(pieces):
            if p.contains(t):
                break
        else:
            raise GraphError(f"split point {label} not covered by the partition")
        if p.is_point:
            continue
        parts = [Piece(p.lo, t, p.lo_closed, False, p.lo_label, label),
                 Piece.point(t, label),
                 Piece(t, p.hi, False, p.hi_closed, label, p.hi_label)]
        pieces[i:i + 1] = [q for q in parts if not q.empty]
    return EvalPartition(tuple(pieces), base.horizon, base.horizon_label)


# ---------------------------------------------------------------------------
# time-split graphs
# ---------------------------------------------------------------------------

@dataclass
class SplitGraph:
    graph: DMG
    base: DMG
    partition: EvalPartition
    pieces: Dict[str, Tuple[Piece, ...]]  # per process, ordered
    mode: str = "strict"
    markov: Dict[str, bool] = field(default_factory=dict)

    def node(self, process: str, piece: Union[Piece, str]) -> str:
        label = piece.label if isinstance(piece, Piece) else piece
        for p in self.pieces[process]:
            if p.label == label:
                return piece_name(process, p, self.partition)
        raise KeyError((process, label))


def piece_name(process: str, piece: Piece, part: EvalPartition) -> str:
    if len(part) == 1 and piece == part.pieces[0]:
        return process
    return f"{process}^{piece.label}"


def _init_nodes(g: DMG) -> Dict[str, str]:
    """Map process -> its exogenous initial-value node."""
    out = {}
    for nid in g.node_ids():
        if nid.init and nid.process is not None:
            out[nid.process] = nid.name
    return out


def time_split_graph(g: DMG, tau, markov: Union[bool, Mapping[str, bool]] = False,
                     mode: str = "strict", horizon: Optional[float] = None) -> SplitGraph:
    """Split every endogenous process of an augmented graph at ``tau``.

    Predictable parents ``u`` of ``v`` feed ``v^I`` from pieces strictly
    before ``I``; adapted parents also from pieces at the same time, the
    overlapping piece with an adapted edge. For a Markov target ``v^I`` only
    the parent's piece at the time of ``I`` and its predecessor are kept. ``mode="figure"`` also drops
    cross-process edges from a point to a later interval.
    """
    if mode not in ("strict", "figure"):
        raise GraphError(f"unknown split mode {mode!r}")
    if g.bidirected_edges:
        raise GraphError("time splitting expects an augmented graph without bidirected edges")
    horizon = float(horizon if horizon is not None else g.meta.get("horizon", 1.0))
    part = split_partition(tau, EvalPartition.whole(horizon))
    inits = _init_nodes(g)
    procs = [v for v in g.endogenous()]
    if isinstance(markov, Mapping):
        unknown = set(markov) - set(procs)
        if unknown:
            raise GraphError(f"unknown process(es): {', '.join(sorted(unknown))}")
        mk = {v: bool(markov.get(v, False)) for v in procs}
    else:
        mk = {v: bool(markov) for v in procs}

    has_zero = any(p.is_point and p.lo == 0 for p in part)
    pieces: Dict[str, Tuple[Piece, ...]] = {}
    names: Dict[Tuple[str, Piece], str] = {}
    nodes: List[NodeId] = []
    init_piece: Dict[str, str] = {}  # process -> name of its {0} piece
    for v in procs:
        ps = list(part.pieces)
        if has_zero and v not in inits:
            # no initial value: the first interval starts closed at 0
            zero, first = ps[0], ps[1]
            ps[0:2] = [Piece(0.0, first.hi, True, first.hi_closed, zero.lo_label, first.hi_label)]
        pieces[v] = tuple(ps)
        for p in ps:
            name = piece_name(v, p, part)
            if has_zero and v in inits and p.is_point and p.lo == 0:
                name = inits[v]
                init_piece[v] = name
                nodes.append(NodeId(name, ENDOGENOUS, process=v, piece=p, init=True))
            else:
                nodes.append(NodeId(name, ENDOGENOUS, process=v, piece=p))
            names[(v, p)] = name
    for nid in g.node_ids():
        if nid.role == ENDOGENOUS:
            continue
        if nid.init and nid.process in init_piece:
            continue
        nodes.append(nid)

    def own(v):
        return [p for p in pieces[v] if names[(v, p)] != init_piece.get(v)]

    edges = []
    for v in procs:
        vs = own(v)
        if v in init_piece:
            edges.append((init_piece[v], names[(v, vs[0])], PREDICTABLE))
        for i, p in enumerate(vs):
            # continuation from the process' own past
            earlier = vs[max(0, i - 1):i] if mk[v] else vs[:i]
            for q in earlier:
                edges.append((names[(v, q)], names[(v, p)], PREDICTABLE))
        for u in g.parents(v):
            dep = g.dependence(u, v)
            if g.role(u) != ENDOGENOUS:
                if g.node(u).init and g.node(u).process == v:
                    if v not in init_piece:
                        edges.append((u, names[(v, vs[0])], dep))
                    continue
                for p in vs:
                    edges.append((u, names[(v, p)], dep))
                continue
            admissible = le if dep == ADAPTED else lt
            us = own(u)
            for p in vs:
                src = [q for q in us if admissible(q, p)]
                if mk[v]:
                    # the piece of u at the time of p, and the one before it
                    co = max(i for i, q in enumerate(us) if q.overlaps(p))
                    near = us[max(0, co - 1):co + 1]
                    src = [q for q in src if q in near]
                for q in src:
                    if mode == "figure" and q.is_point and not p.is_point and p.lo >= q.lo:
                        continue
                    d = ADAPTED if dep == ADAPTED and q.overlaps(p) else PREDICTABLE
                    edges.append((names[(u, q)], names[(v, p)], d))
    meta = dict(g.meta)
    meta.update(horizon=horizon, split=[p.label for p in part])
    split = DMG(nodes, edges, meta=meta)
    return SplitGraph(split, g, part, pieces, mode, mk)


def subsample_graph(sg: Union[SplitGraph, DMG]) -> DMG:
    """Project out every endogenous interval piece, keeping points."""
    g = sg.graph if isinstance(sg, SplitGraph) else sg
    drop = [n.name for n in g.node_ids()
            if n.role == ENDOGENOUS and n.piece is not None and not n.piece.is_point]
    return latent_project(g, drop)


def attach_pieces(g: DMG, tau, horizon: Optional[float] = None) -> DMG:
    """Recover piece metadata from node names of a graph split at ``tau``.

    Graphs read from an edge list only carry names; this matches
    ``X^label`` against the pieces of the partition (and the merged first
    piece of a process without an initial value).
    """
    horizon = float(horizon if horizon is not None else g.meta.get("horizon", 1.0))
    part = split_partition(tau, EvalPartition.whole(horizon))
    ps = list(part.pieces)
    by_label = {p.label: p for p in ps}
    if len(ps) > 1 and ps[0].is_point and ps[0].lo == 0:
        merged = Piece(0.0, ps[1].hi, True, ps[1].hi_closed, ps[0].lo_label, ps[1].hi_label)
        by_label.setdefault(merged.label, merged)
    nodes = []
    for nid in g.node_ids():
        if nid.role == ENDOGENOUS and nid.piece is None and "^" in nid.name:
            proc, label = nid.name.split("^", 1)
            p = by_label.get(label)
            if p is not None:
                init = p.is_point and p.lo == 0
                nid = NodeId(nid.name, ENDOGENOUS, process=proc, piece=p, init=init)
        nodes.append(nid)
    return g.replace(nodes=nodes)


def _process_of(nid: NodeId) -> Tuple[str, Optional[Piece]]:
    if nid.process is not None:
        return nid.process, nid.piece
    if "^" in nid.name:
        return nid.name.split("^", 1)[0], None
    return nid.name, None


def collapse_graph(sg: Union[SplitGraph, DMG], require_cover: bool = False,
                   horizon: Optional[float] = None) -> DMG:
    """Concatenate each process' pieces back into a single node.

    A ``{0}`` piece holding an initial value becomes the exogenous initial
    node again. If a process' pieces do not cover the time axis the node is
    named after the union of its piece labels.
    """
    g = sg.graph if isinstance(sg, SplitGraph) else sg
    horizon = float(horizon if horizon is not None else g.meta.get("horizon", 1.0))
    groups: Dict[str, List[NodeId]] = {}
    target: Dict[str, str] = {}
    nodes: List[NodeId] = []
    edges = []
    for nid in g.node_ids():
        if nid.role != ENDOGENOUS:
            target[nid.name] = nid.name
            nodes.append(nid)
            continue
        proc, _ = _process_of(nid)
        groups.setdefault(proc, []).append(nid)
    for proc, members in groups.items():
        pcs = [m.piece for m in members if m.piece is not None]
        if len(pcs) == len(members) and pcs:
            ok = covers(pcs, horizon)
        else:
            ok = len(members) == 1 and members[0].piece is None
        if not ok and require_cover:
            raise GraphError(f"pieces of {proc} leave a gap in [0, {horizon:g}]")
        if ok:
            name = proc
        else:
            rest = sorted((m.piece for m in members if m.piece is not None and not m.init),
                          key=Piece.sort_key)
            # a process kept only at its initial time still gets its own node
            rest = rest or sorted((m.piece for m in members if m.piece is not None),
                                  key=Piece.sort_key)
            name = f"{proc}^{_union_label(rest)}" if rest else proc
        nodes.append(NodeId(name, ENDOGENOUS, process=proc))
        for m in members:
            if m.init:
                nodes.append(NodeId(m.name, EXOGENOUS, process=proc, init=True))
                edges.append((m.name, name, PREDICTABLE))
            target[m.name] = name
    proc_of = {m.name: _process_of(m)[0] for ms in groups.values() for m in ms}
    for u, v, dep in g.directed_edges:
        tu, tv = target[u], target[v]
        if u in proc_of and g.node(u).init and proc_of[u] == proc_of.get(v):
            continue  # already X0 -> v
        if tu != tv:
            edges.append((tu, tv, dep))
    bidirected = []
    for u, v, dep in g.bidirected_edges:
        tu, tv = target[u], target[v]
        if tu != tv:
            bidirected.append((tu, tv, dep))
    meta = {k: val for k, val in g.meta.items() if k != "split"}
    return DMG(nodes, edges, bidirected, meta=meta)


def _union_label(pieces: List[Piece]) -> str:
    if all(p.is_point for p in pieces):
        return "{" + ",".join(p.label for p in pieces) + "}"
    return "u".join(p.label if not p.is_point else "{" + p.label + "}" for p in pieces)


def marginalise_graph(g: DMG, drop: Iterable[str]) -> DMG:
    drop = list(drop)
    missing = [x for x in drop if x not in g]
    if missing:
        raise GraphError(f"unknown node(s): {', '.join(sorted(missing))}")
    return latent_project(g, drop)

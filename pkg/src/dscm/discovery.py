"""FCI on an independence model and checks of its output against a graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from . import dmg
from .dmg import DMG, GraphError
from .independence import IndependenceModel, enumerate_im

CIRCLE, ARROW, TAIL = "o", ">", "-"


@dataclass
class PAG:
    """Partial ancestral graph. ``marks[(a, b)]`` is the mark at ``b`` on
    the edge between ``a`` and ``b``."""

    nodes: Tuple[str, ...]
    marks: Dict[Tuple[str, str], str] = field(default_factory=dict)
    sepsets: Dict[FrozenSet[str], FrozenSet[str]] = field(default_factory=dict, compare=False)

    def adjacent(self, a: str, b: str) -> bool:
        return (a, b) in self.marks

    def mark(self, a: str, b: str) -> str:
        return self.marks[(a, b)]

    def neighbours(self, a: str) -> List[str]:
        return [b for b in self.nodes if (a, b) in self.marks]

    def add_edge(self, a: str, b: str, at_a: str = CIRCLE, at_b: str = CIRCLE):
        self.marks[(b, a)] = at_a
        self.marks[(a, b)] = at_b

    def remove_edge(self, a: str, b: str):
        self.marks.pop((a, b), None)
        self.marks.pop((b, a), None)

    def skeleton(self) -> FrozenSet[FrozenSet[str]]:
        return frozenset(frozenset(k) for k in self.marks)

    def edges(self) -> List[Tuple[str, str, str]]:
        """``(a, b, form)`` with forms like ``o->``, ``-->``, ``<->``."""
        out = []
        for a, b in sorted(tuple(sorted(e)) for e in self.skeleton()):
            left, right = self.mark(b, a), self.mark(a, b)
            if left == ARROW and right != ARROW:
                a, b, left, right = b, a, right, left
            lc = {CIRCLE: "o", ARROW: "<", TAIL: "-"}[left]
            rc = {CIRCLE: "o", ARROW: ">", TAIL: "-"}[right]
            out.append((a, b, f"{lc}-{rc}"))
        return sorted(out)

    def to_text(self) -> str:
        lines = [f"# nodes: {','.join(self.nodes)}"]
        lines += [f"{a} {form} {b}" for a, b, form in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PAG":
        nodes: List[str] = []
        rows = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("# nodes:"):
                nodes = dmg.split_names(line.split(":", 1)[1])
                continue
            if line.startswith("#"):
                continue
            a, form, b = line.split()
            left = {"o": CIRCLE, "<": ARROW, "-": TAIL}[form[0]]
            right = {"o": CIRCLE, ">": ARROW, "-": TAIL}[form[-1]]
            rows.append((a, b, left, right))
        if not nodes:
            nodes = sorted({n for r in rows for n in r[:2]})
        p = cls(tuple(nodes))
        for a, b, left, right in rows:
            p.add_edge(a, b, left, right)
        return p

    def __eq__(self, other):
        if not isinstance(other, PAG):
            return NotImplemented
        return set(self.nodes) == set(other.nodes) and self.marks == other.marks

    def relabel(self, mapping: Dict[str, str]) -> "PAG":
        """Rename nodes; names missing from ``mapping`` are kept."""
        f = lambda n: mapping.get(n, n)  # noqa: E731
        p = PAG(tuple(f(n) for n in self.nodes))
        p.marks = {(f(a), f(b)): m for (a, b), m in self.marks.items()}
        return p


# ---------------------------------------------------------------------------
# FCI
# ---------------------------------------------------------------------------

def fci(im: IndependenceModel, selection_bias: bool = False) -> PAG:
    """Skeleton by exhaustive separating-set search, colliders from
    sepsets, then orientation rules R1-R4 and R8-R10 to closure (R5-R7 as
    well with ``selection_bias``)."""
    nodes = tuple(im.universe)
    p = PAG(nodes)
    for a, b in combinations(nodes, 2):
        sep = _sepset(im, a, b)
        if sep is None:
            p.add_edge(a, b)
        else:
            p.sepsets[frozenset((a, b))] = sep
    _orient_colliders(p)
    rules = [_r1, _r2, _r3, _r4]
    if selection_bias:
        rules += [_r5, _r6, _r7]
    rules += [_r8, _r9, _r10]
    changed = True
    while changed:
        changed = False
        for rule in rules:
            if rule(p):
                changed = True
    return p


def _sepset(im: IndependenceModel, a: str, b: str) -> Optional[FrozenSet[str]]:
    rest = [n for n in im.universe if n not in (a, b)]
    for r in range(min(im.max_cond, len(rest)) + 1):
        for c in combinations(rest, r):
            if im.separated([a], [b], c):
                return frozenset(c)
    return None


def _set(p: PAG, a: str, b: str, m: str) -> bool:
    if p.marks[(a, b)] == m:
        return False
    p.marks[(a, b)] = m
    return True


def _orient_colliders(p: PAG):
    for c in p.nodes:
        nb = p.neighbours(c)
        for a, b in combinations(nb, 2):
            if p.adjacent(a, b):
                continue
            if c not in p.sepsets[frozenset((a, b))]:
                _set(p, a, c, ARROW)
                _set(p, b, c, ARROW)


def _r1(p: PAG) -> bool:
    # a *-> b o-* c, a and c not adjacent  =>  b --> c
    ch = False
    for b in p.nodes:
        for a in p.neighbours(b):
            if p.mark(a, b) != ARROW:
                continue
            for c in p.neighbours(b):
                if c == a or p.adjacent(a, c) or p.mark(c, b) != CIRCLE:
                    continue
                ch |= _set(p, c, b, TAIL)
                ch |= _set(p, b, c, ARROW)
    return ch


def _r2(p: PAG) -> bool:
    # a --> b *-> c or a *-> b --> c, and a *-o c  =>  a *-> c
    ch = False
    for a in p.nodes:
        for c in p.neighbours(a):
            if p.mark(a, c) != CIRCLE:
                continue
            for b in p.neighbours(a):
                if b == c or not p.adjacent(b, c):
                    continue
                first = p.mark(a, b) == ARROW and p.mark(b, a) == TAIL and p.mark(b, c) == ARROW
                second = p.mark(a, b) == ARROW and p.mark(b, c) == ARROW and p.mark(c, b) == TAIL
                if first or second:
                    ch |= _set(p, a, c, ARROW)
                    break
    return ch


def _r3(p: PAG) -> bool:
    # a *-> b <-* c, a *-o d o-* c, a, c not adjacent, d *-o b  =>  d *-> b
    ch = False
    for b in p.nodes:
        for d in p.neighbours(b):
            if p.mark(d, b) != CIRCLE:
                continue
            parents = [x for x in p.neighbours(b) if x != d and p.mark(x, b) == ARROW]
            for a, c in combinations(parents, 2):
                if p.adjacent(a, c):
                    continue
                if (p.adjacent(a, d) and p.adjacent(c, d)
                        and p.mark(a, d) == CIRCLE and p.mark(c, d) == CIRCLE):
                    ch |= _set(p, d, b, ARROW)
                    break
    return ch


def _is_parent(p: PAG, x: str, y: str) -> bool:
    return p.adjacent(x, y) and p.mark(x, y) == ARROW and p.mark(y, x) == TAIL


def _r4(p: PAG) -> bool:
    # discriminating path <d, ..., a, b, c> for b, with b o-* c
    ch = False
    for c in p.nodes:
        for b in p.neighbours(c):
            if p.mark(c, b) != CIRCLE:
                continue
            found = _discriminating(p, b, c)
            if found is None:
                continue
            d, a = found
            if b in p.sepsets[frozenset((d, c))]:
                ch |= _set(p, c, b, TAIL)
                ch |= _set(p, b, c, ARROW)
            else:
                ch |= _set(p, a, b, ARROW)
                ch |= _set(p, b, a, ARROW)
                ch |= _set(p, c, b, ARROW)
                ch |= _set(p, b, c, ARROW)
    return ch


def _discriminating(p: PAG, b: str, c: str) -> Optional[Tuple[str, str]]:
    """Return (d, a): the far end and the node before ``b`` of a
    discriminating path for ``b`` into ``c``, if one exists."""
    for a in p.neighbours(b):
        if a == c or not _is_parent(p, a, c) or p.mark(b, a) != ARROW:
            continue
        # BFS over paths back from a, every inner node a collider and parent of c
        queue = [(a, b, (c, b, a))]
        seen = {a}
        while queue:
            cur, nxt, path = queue.pop(0)
            for d in p.neighbours(cur):
                if d in path or p.mark(d, cur) != ARROW:
                    continue
                if d != c and not p.adjacent(d, c):
                    return d, a
                if d not in seen and _is_parent(p, d, c) and p.mark(cur, d) == ARROW:
                    seen.add(d)
                    queue.append((d, cur, path + (d,)))
    return None


def _r5(p: PAG) -> bool:
    # uncovered circle path a o-o b o-o ... o-o a closing a cycle => tails
    ch = False
    for a in p.nodes:
        for b in p.neighbours(a):
            if p.mark(a, b) != CIRCLE or p.mark(b, a) != CIRCLE:
                continue
            for path in _uncovered_paths(p, a, b, circle_only=True):
                if len(path) < 4:
                    continue
                g, d = path[1], path[-2]
                if p.adjacent(a, d) or p.adjacent(b, g):
                    continue
                ch |= _set(p, a, b, TAIL)
                ch |= _set(p, b, a, TAIL)
                for x, y in zip(path, path[1:]):
                    ch |= _set(p, x, y, TAIL)
                    ch |= _set(p, y, x, TAIL)
                break
    return ch


def _r6(p: PAG) -> bool:
    # a --- b o-* c  =>  b --* c
    ch = False
    for b in p.nodes:
        for a in p.neighbours(b):
            if p.mark(a, b) != TAIL or p.mark(b, a) != TAIL:
                continue
            for c in p.neighbours(b):
                if c != a and p.mark(c, b) == CIRCLE:
                    ch |= _set(p, c, b, TAIL)
    return ch


def _r7(p: PAG) -> bool:
    # a --o b o-* c, a and c not adjacent  =>  b --* c
    ch = False
    for b in p.nodes:
        for a in p.neighbours(b):
            if p.mark(b, a) != TAIL or p.mark(a, b) != CIRCLE:
                continue
            for c in p.neighbours(b):
                if c != a and not p.adjacent(a, c) and p.mark(c, b) == CIRCLE:
                    ch |= _set(p, c, b, TAIL)
    return ch


def _r8(p: PAG) -> bool:
    # a --> b --> c or a --o b --> c, with a o-> c  =>  a --> c
    ch = False
    for a in p.nodes:
        for c in p.neighbours(a):
            if p.mark(a, c) != ARROW or p.mark(c, a) != CIRCLE:
                continue
            for b in p.neighbours(a):
                if b == c or not _is_parent(p, b, c):
                    continue
                if p.mark(b, a) == TAIL and p.mark(a, b) in (ARROW, CIRCLE):
                    ch |= _set(p, c, a, TAIL)
                    break
    return ch


def _pd_edge(p: PAG, x: str, y: str) -> bool:
    """Edge x *-* y could be oriented x --> y."""
    return p.mark(y, x) != ARROW and p.mark(x, y) != TAIL


def _uncovered_paths(p: PAG, a: str, end: str, circle_only: bool = False,
                     avoid: Optional[str] = None):
    """Uncovered paths from ``a`` to ``end`` (potentially directed, or
    circle-only), as node tuples."""
    def ok(x, y):
        if circle_only:
            return p.mark(x, y) == CIRCLE and p.mark(y, x) == CIRCLE
        return _pd_edge(p, x, y)

    stack = [(a,)]
    while stack:
        path = stack.pop()
        last = path[-1]
        for nxt in p.neighbours(last):
            if nxt in path or nxt == avoid or not ok(last, nxt):
                continue
            if len(path) >= 2 and p.adjacent(path[-2], nxt):
                continue  # covered triple
            if len(path) == 1 and nxt == end and circle_only:
                continue
            new = path + (nxt,)
            if nxt == end:
                yield new
            else:
                stack.append(new)


def _r9(p: PAG) -> bool:
    # a o-> c and an uncovered p.d. path a, b, ..., c with b, c not adjacent
    ch = False
    for a in p.nodes:
        for c in p.neighbours(a):
            if p.mark(a, c) != ARROW or p.mark(c, a) != CIRCLE:
                continue
            for path in _uncovered_paths(p, a, c):
                if len(path) >= 4 and not p.adjacent(path[1], c):
                    ch |= _set(p, c, a, TAIL)
                    break
    return ch


def _r10(p: PAG) -> bool:
    # a o-> c, b --> c <-- d, uncovered p.d. paths a..b and a..d whose
    # first steps m, w differ and are not adjacent  =>  a --> c
    ch = False
    for a in p.nodes:
        for c in p.neighbours(a):
            if p.mark(a, c) != ARROW or p.mark(c, a) != CIRCLE:
                continue
            pars = [x for x in p.neighbours(c) if x != a and _is_parent(p, x, c)]
            for b, d in combinations(pars, 2):
                mb = {path[1] for path in _uncovered_paths(p, a, b, avoid=c)}
                md = {path[1] for path in _uncovered_paths(p, a, d, avoid=c)}
                if any(m != w and not p.adjacent(m, w) for m in mb for w in md):
                    ch |= _set(p, c, a, TAIL)
                    break
    return ch


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

def maximal_skeleton(g: DMG, nodes: Optional[Iterable[str]] = None) -> FrozenSet[FrozenSet[str]]:
    """Pairs not sigma-separated by any subset of the remaining nodes."""
    nodes = sorted(nodes if nodes is not None else g.nodes)
    out = set()
    for a, b in combinations(nodes, 2):
        rest = [n for n in nodes if n not in (a, b)]
        if not any(dmg.sigma_separated(g, [a], [b], c)
                   for r in range(len(rest) + 1) for c in combinations(rest, r)):
            out.add(frozenset((a, b)))
    return frozenset(out)


def soundness_check(g: DMG, p: PAG) -> bool:
    """Skeleton as implied by IM_sigma(g) on the PAG's nodes (the other
    nodes of ``g`` are latent); an arrowhead at b on edge a-b means b is
    not an ancestor of a, a tail at b means it is."""
    if not set(p.nodes) <= set(g.nodes):
        return False
    if p.skeleton() != maximal_skeleton(g, p.nodes):
        return False
    anc = {n: dmg.ancestors(g, [n]) for n in p.nodes}
    for (a, b), m in p.marks.items():
        if m == ARROW and b in anc[a]:
            return False
        if m == TAIL and b not in anc[a]:
            return False
    return True


def completeness_check(g1: DMG, g2: DMG) -> bool:
    """True iff (equal PAGs) agrees with (equal independence models)."""
    if set(g1.nodes) != set(g2.nodes):
        raise GraphError("graphs must share the same node set")
    im1, im2 = enumerate_im(g1), enumerate_im(g2)
    return (fci(im1) == fci(im2)) == (im1 == im2)

"""Systems of SDEs and the graphs they induce.

Each endogenous process ``v`` solves

    X_v(t) = X_v(0) + sum_j  int_0^t g_{v,j}(s-, X_alpha(v)) dX_{beta(v)_j}(s)

so ``alpha(v)`` holds the integrand arguments (predictable dependence) and
``beta(v)`` the integrators (adapted dependence), one integrand per
integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .. import dmg
from ..dmg import ADAPTED, DMG, EXOGENOUS, PREDICTABLE, NodeId
from . import expr as E

DRIVER_KINDS = ("brownian", "poisson", "time", "constant")


class ModelError(ValueError):
    """Invalid model; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class UnsolvableError(ModelError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int = 0
    col: int = 0
    severity: str = "error"

    def __str__(self):
        where = f"{self.line}:{self.col}: " if self.line else ""
        return f"{where}{self.severity}: {self.message}"


@dataclass(frozen=True)
class Dist:
    kind: str  # "constant" | "normal"
    mean: float = 0.0
    var: float = 0.0

    def to_text(self) -> str:
        if self.kind == "constant":
            return f"constant({self.mean!r})"
        return f"normal({self.mean!r}, {self.var!r})"


@dataclass(frozen=True)
class DriverSpec:
    name: str
    kind: str
    param: float = 0.0  # poisson rate or constant value

    def __post_init__(self):
        if self.kind not in DRIVER_KINDS:
            raise ModelError([Diagnostic(f"unknown driver kind {self.kind!r}")])
        if self.kind == "poisson" and not self.param > 0:
            raise ModelError([Diagnostic(f"poisson rate of {self.name} must be > 0")])

    def to_text(self) -> str:
        if self.kind == "poisson":
            spec = f"poisson({self.param!r})"
        elif self.kind == "constant":
            spec = f"constant({self.param!r})"
        else:
            spec = self.kind
        return f"exogenous {self.name}: {spec};"


@dataclass(frozen=True)
class ProcessSpec:
    name: str
    init: Dist
    alpha: Tuple[str, ...]
    beta: Tuple[str, ...]
    g: Tuple[E.Expr, ...]
    markov: bool = False
    # set by perfect interventions: path pinned to init, no initial-value node
    intervened: bool = False

    def to_text(self) -> str:
        gs = ", ".join(E.to_text(x) for x in self.g)
        lines = [
            f"process {self.name} {{",
            f"  init = {self.init.to_text()};",
            f"  alpha = {{{', '.join(self.alpha)}}};",
            f"  beta = {{{', '.join(self.beta)}}};",
            f"  g = [{gs}];",
        ]
        if self.markov:
            lines.append("  markov = true;")
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class SdeSystem:
    processes: Tuple[ProcessSpec, ...]
    drivers: Tuple[DriverSpec, ...]
    horizon: float
    warnings: Tuple[Diagnostic, ...] = field(default=(), compare=False)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.processes)

    @property
    def driver_names(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.drivers)

    def process(self, name: str) -> ProcessSpec:
        for p in self.processes:
            if p.name == name:
                return p
        raise KeyError(name)

    def driver(self, name: str) -> DriverSpec:
        for d in self.drivers:
            if d.name == name:
                return d
        raise KeyError(name)

    def markov_flags(self) -> Dict[str, bool]:
        return {p.name: p.markov for p in self.processes}

    def to_text(self) -> str:
        body = [d.to_text() for d in self.drivers]
        body += [p.to_text() for p in self.processes]
        body.append(f"horizon {self.horizon!r};")
        inner = "\n".join("  " + line for b in body for line in b.splitlines())
        return "system {\n" + inner + "\n}\n"


def init_node(v: str) -> str:
    return f"{v}^0"


def validate(sys: SdeSystem) -> SdeSystem:
    """Check names and references; attach warnings. Raises ModelError."""
    errs: List[Diagnostic] = []
    notes: List[Diagnostic] = []
    seen = set()
    for n in sys.names + sys.driver_names:
        if n in seen:
            errs.append(Diagnostic(f"duplicate name {n!r}"))
        if n == E.TIME:
            errs.append(Diagnostic(f"name {n!r} is reserved for time"))
        seen.add(n)
    if not sys.processes:
        errs.append(Diagnostic("system declares no processes"))
    if not sys.horizon > 0:
        errs.append(Diagnostic("horizon must be > 0"))
    for p in sys.processes:
        for ref in p.alpha + p.beta:
            if ref not in seen:
                errs.append(Diagnostic(f"{p.name}: unresolved name {ref!r}"))
        if p.name in p.beta:
            errs.append(Diagnostic(f"{p.name}: a process cannot be its own integrator"))
        if len(set(p.beta)) != len(p.beta):
            errs.append(Diagnostic(f"{p.name}: repeated integrator"))
        if len(p.g) != len(p.beta):
            errs.append(Diagnostic(
                f"{p.name}: {len(p.g)} integrand(s) for {len(p.beta)} integrator(s)"))
        allowed = set(p.alpha) | {p.name, E.TIME}
        for x in p.g:
            bad = sorted(E.variables(x) - allowed)
            if bad:
                errs.append(Diagnostic(
                    f"{p.name}: integrand uses {', '.join(bad)} outside alpha"))
            if E.uses(x, {"/", "exp"}):
                notes.append(Diagnostic(
                    f"{p.name}: '/' or 'exp' may break linear growth/Lipschitz bounds",
                    severity="warning"))
        if p.init.kind == "normal" and p.init.var < 0:
            errs.append(Diagnostic(f"{p.name}: negative initial variance"))
    if errs:
        raise ModelError(errs)
    return replace(sys, warnings=tuple(notes))


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

def graph_of_sdes(sys: SdeSystem) -> DMG:
    """Augmented graph: processes, drivers and initial-value nodes.

    ``u -> v`` for every ``u`` in ``alpha(v) | beta(v)`` other than ``v``;
    edges from integrators are adapted, all others predictable.
    """
    nodes = [NodeId(d, EXOGENOUS) for d in sys.driver_names]
    edges = []
    for p in sys.processes:
        nodes.append(NodeId(p.name, process=p.name))
        if not p.intervened:
            nodes.append(NodeId(init_node(p.name), EXOGENOUS, process=p.name, init=True))
            edges.append((init_node(p.name), p.name, PREDICTABLE))
        for u in p.alpha:
            if u != p.name:
                edges.append((u, p.name, PREDICTABLE))
        for u in p.beta:
            edges.append((u, p.name, ADAPTED))
    return DMG(nodes, edges, meta={"horizon": sys.horizon})


@dataclass(frozen=True)
class SolvabilityReport:
    solvable: bool
    witness: Optional[Tuple[str, FrozenSet[str]]]
    order: Tuple[FrozenSet[str], ...]

    def __bool__(self):
        return self.solvable


def check_unique_solvability(sys: SdeSystem) -> SolvabilityReport:
    """Solvable iff no process has an integrator inside its own SCC."""
    g = graph_of_sdes(sys)
    order = tuple(dmg.scc_partition(g))
    sc = {v: comp for comp in order for v in comp}
    witness = None
    for p in sys.processes:
        bad = frozenset(p.beta) & sc[p.name]
        if bad:
            witness = (p.name, bad)
            break
    return SolvabilityReport(witness is None, witness, order)


def induced_dscm_graph(sys: SdeSystem) -> DMG:
    """Mixed graph of the DSCM induced by a uniquely solvable system."""
    report = check_unique_solvability(sys)
    if not report:
        v, bad = report.witness
        raise UnsolvableError([Diagnostic(
            f"{v} has integrator(s) {', '.join(sorted(bad))} in its own cycle")])
    g = dmg.to_dmg(graph_of_sdes(sys))
    g.meta["simple"] = True
    return g


def intervene_sde(sys: SdeSystem, target: Iterable[str], value=0.0) -> SdeSystem:
    """Pin each target process to a constant path.

    ``value`` is a number or a mapping from target to number.
    """
    target = list(target)
    for v in target:
        if v not in sys.names:
            raise ModelError([Diagnostic(f"intervention target {v!r} is not a process")])
    procs = []
    for p in sys.processes:
        if p.name in target:
            x = value[p.name] if isinstance(value, Mapping) else value
            p = ProcessSpec(p.name, Dist("constant", float(x)), (), (), (),
                            markov=p.markov, intervened=True)
        procs.append(p)
    return replace(sys, processes=tuple(procs))

"""Command line interface: ``dscm <command> ...``.

Inputs are model files (``.dscm``) or graph files (``.edges``/``.dot``).
A path of the form ``data:NAME`` names a file bundled with the package,
e.g. ``data:example1.dscm``. Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

from . import data_path, dmg
from . import time_ops as T
from .discovery import fci
from .dmg import DMG, GraphError
from .independence import (GuaranteeError, IndependenceModel, InconsistentModel, docalc_check,
                           enumerate_im, local_independence_graph, sigma_li_query)
from .sde import ModelError, intervene_sde, parse_model, print_model
from .sde.system import SdeSystem, check_unique_solvability, graph_of_sdes
from .simulate import SimConfig, SimulationError, simulate


class CliError(Exception):
    """Domain failure: reported on stderr with exit code 1."""


def _resolve(path: str) -> str:
    if path.startswith("data:"):
        return data_path(path[5:])
    return path


def _read(path: str) -> str:
    try:
        with open(_resolve(path), encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _load_model(path: str) -> SdeSystem:
    return parse_model(_read(path))


def _is_model(path: str) -> bool:
    return os.path.splitext(path)[1] == ".dscm"


def _load_graph(path: str) -> DMG:
    """Augmented graph of a model, or a stored graph."""
    if _is_model(path):
        return graph_of_sdes(_load_model(path))
    text = _read(path)
    if os.path.splitext(path)[1] == ".dot" or text.lstrip().startswith(("digraph", "strict")):
        return dmg.parse_dot(text)
    return dmg.parse_edges(text)


def _names(text: Optional[str]) -> List[str]:
    if not text:
        return []
    return dmg.split_names(text)


def _emit_graph(g: DMG, fmt: str) -> str:
    return dmg.export_dot(g) if fmt == "dot" else dmg.export_edges(g)


def _markov(args, path: str):
    if args.markov:
        return True
    return _load_model(path).markov_flags() if _is_model(path) else False


def _split(args) -> T.SplitGraph:
    g = _load_graph(args.input)
    if args.horizon is not None:
        horizon = args.horizon
    else:
        horizon = g.meta.get("horizon", 1.0)
    tau = T.parse_tau(args.tau, horizon)
    return T.time_split_graph(g, tau, markov=_markov(args, args.input), mode=args.mode,
                              horizon=horizon)


# ---------------------------------------------------------------------------
# commands; each returns the text for stdout
# ---------------------------------------------------------------------------

def cmd_validate(args) -> str:
    sys_ = _load_model(args.input)
    report = check_unique_solvability(sys_)
    out = {"valid": True, "solvable": report.solvable,
           "warnings": [str(w) for w in sys_.warnings],
           "witness": None if report.solvable else
           {"process": report.witness[0], "integrators": sorted(report.witness[1])}}
    if args.json:
        return json.dumps(out, indent=2)
    lines = ["valid: true", f"solvable: {str(report.solvable).lower()}"]
    if not report.solvable:
        v, bad = report.witness
        lines.append(f"witness: {v} has integrator(s) {', '.join(sorted(bad))} in its own cycle")
    lines += [f"warning: {w}" for w in out["warnings"]]
    return "\n".join(lines)


def cmd_graph(args) -> str:
    g = _load_graph(args.input)
    if args.mixed:
        g = dmg.to_dmg(g)
    return _emit_graph(g, args.format)


def cmd_split(args) -> str:
    return _emit_graph(_split(args).graph, args.format)


def cmd_subsample(args) -> str:
    return _emit_graph(T.subsample_graph(_split(args)), args.format)


def cmd_collapse(args) -> str:
    g = _load_graph(args.input)
    if args.tau is not None:
        g = T.attach_pieces(g, args.tau, args.horizon)
    return _emit_graph(T.collapse_graph(g, require_cover=args.require_cover,
                                        horizon=args.horizon), args.format)


def cmd_marginalise(args) -> str:
    return _emit_graph(T.marginalise_graph(_load_graph(args.input), _names(args.drop)),
                       args.format)


def cmd_intervene(args) -> str:
    targets = _names(args.targets)
    if args.model:
        if not _is_model(args.input):
            raise CliError("--model needs a .dscm input")
        return print_model(intervene_sde(_load_model(args.input), targets, args.value))
    return _emit_graph(dmg.intervene_graph(_load_graph(args.input), targets), args.format)


def cmd_sep(args) -> str:
    g = _load_graph(args.input)
    a, b, c = _names(args.a), _names(args.b), _names(args.c)
    if not a or not b:
        raise CliError("--a and --b must name at least one node")
    test = dmg.sigma_separated if args.mode == "sigma" else dmg.d_separated
    sep = test(g, a, b, c)
    if args.json:
        return json.dumps({"a": a, "b": b, "c": c, "mode": args.mode, "separated": sep})
    return f"separated: {str(sep).lower()}"


def cmd_im(args) -> str:
    g = _load_graph(args.input)
    nodes = _names(args.nodes) or None
    im = enumerate_im(g, args.max_cond, nodes=nodes, sets=args.sets,
                      sigma=args.mode == "sigma")
    if args.json:
        return json.dumps({"nodes": list(im.universe), "max_cond": im.max_cond,
                           "separations": [[sorted(a), sorted(b), sorted(c)]
                                           for a, b, c in im.separations()]}, indent=2)
    return im.to_text().rstrip("\n")


def cmd_lig(args) -> str:
    path = args.input
    sys_ = _load_model(path) if _is_model(path) else None
    g = _load_graph(path)
    if args.drop:
        g = T.marginalise_graph(g, _names(args.drop))
    lig = local_independence_graph(g, sys_ if not args.drop else None)
    result = {"guarantee": lig.guarantee, "violations": list(lig.report.violations),
              "edges": dmg.export_edges(lig.graph).splitlines()}
    if args.query:
        a, b, c = _query_parts(args.query)
        st = sigma_li_query(lig, a, b, c)
        result["query"] = {"a": a, "b": b, "c": c, "holds": st.holds}
    if args.json:
        return json.dumps(result, indent=2)
    lines = [f"guarantee: {str(lig.guarantee).lower()}"]
    lines += [f"violation: {v}" for v in result["violations"]]
    lines += result["edges"]
    if "query" in result:
        q = result["query"]
        lines.append(f"{','.join(q['a'])} -/-> {','.join(q['b'])} | {','.join(q['c'])}: "
                     f"{str(q['holds']).lower()}")
    return "\n".join(lines)


def _query_parts(text: str):
    """``A;B;C`` with comma-separated node names."""
    parts = text.split(";")
    if len(parts) not in (2, 3):
        raise CliError("--query must look like 'A;B' or 'A;B;C'")
    parts += [""] * (3 - len(parts))
    return tuple(_names(p) for p in parts)


def cmd_docalc(args) -> str:
    g = _load_graph(args.input)
    if g.exogenous():
        g = dmg.to_dmg(g)
    ok = docalc_check(g, args.rule, _names(args.x), _names(args.y), _names(args.z), _names(args.w))
    if args.json:
        return json.dumps({"rule": args.rule, "applies": ok})
    return f"rule {args.rule} applies: {str(ok).lower()}"


def cmd_fci(args) -> str:
    if args.im:
        im = IndependenceModel.from_text(_read(args.im))
    else:
        g = _load_graph(args.from_graph)
        nodes = _names(args.nodes) or [n for n in g.nodes if g.role(n) == dmg.ENDOGENOUS]
        im = enumerate_im(g, args.max_cond, nodes=nodes)
    pag = fci(im, selection_bias=args.selection_bias)
    if args.json:
        return json.dumps({"nodes": list(pag.nodes),
                           "edges": [[a, form, b] for a, b, form in pag.edges()]}, indent=2)
    return pag.to_text().rstrip("\n")


def cmd_simulate(args) -> Optional[str]:
    sys_ = _load_model(args.input)
    cfg = SimConfig(dt=args.dt, n_paths=args.paths, seed=args.seed, horizon=args.horizon)
    ens = simulate(sys_, cfg)
    if args.out:
        if args.out.endswith(".npz"):
            ens.save_npz(args.out)
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(ens.to_csv())
        return None
    return ens.to_csv().rstrip("\n")


def cmd_verify(args) -> str:
    from . import acceptance

    numbers = [int(x) for x in _names(args.criteria)] or None
    if numbers:
        unknown = sorted(set(numbers) - set(acceptance.CRITERIA))
        if unknown:
            raise CliError(f"unknown criterion number(s): {unknown}")
    results = []
    for n in numbers or sorted(acceptance.CRITERIA):
        r = acceptance.run_one(n)
        results.append(r)
        if not args.json:
            print(acceptance.format_line(r), flush=True)
    args._failed = not all(r.ok for r in results)
    if args.json:
        return json.dumps([{"criterion": r.number, "title": r.title, "passed": r.ok,
                            "seconds": round(r.seconds, 2), "detail": r.detail}
                           for r in results], indent=2)
    return None


# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dscm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help_, graph_out=False, needs_input=True):
        s = sub.add_parser(name, help=help_)
        if needs_input:
            s.add_argument("input", help="model (.dscm) or graph (.edges/.dot) file")
        if graph_out:
            s.add_argument("--format", choices=("edges", "dot"), default="edges")
        s.add_argument("--json", action="store_true", help="machine-readable output")
        s.set_defaults(func=fn)
        return s

    def split_flags(s):
        s.add_argument("--tau", required=True, help="split points, e.g. 0,s,t or 0,s=0.25,0.5")
        s.add_argument("--mode", choices=("strict", "figure"), default="strict")
        s.add_argument("--markov", action="store_true",
                       help="treat every process as Markov (default: the model's flags)")
        s.add_argument("--horizon", type=float)

    cmd("validate", cmd_validate, "parse a model and check unique solvability")
    s = cmd("graph", cmd_graph, "augmented graph of a model", graph_out=True)
    s.add_argument("--mixed", action="store_true", help="project out exogenous nodes")
    split_flags(cmd("split", cmd_split, "time-split graph", graph_out=True))
    split_flags(cmd("subsample", cmd_subsample, "subsampled graph", graph_out=True))
    s = cmd("collapse", cmd_collapse, "collapse a time-split graph", graph_out=True)
    s.add_argument("--require-cover", action="store_true")
    s.add_argument("--tau", help="split points the input was made with (needed for edge lists)")
    s.add_argument("--horizon", type=float)
    s = cmd("marginalise", cmd_marginalise, "latent projection", graph_out=True)
    s.add_argument("--drop", required=True, help="comma-separated nodes")
    s = cmd("intervene", cmd_intervene, "perfect intervention", graph_out=True)
    s.add_argument("--targets", required=True)
    s.add_argument("--model", action="store_true", help="print the intervened model instead")
    s.add_argument("--value", type=float, default=0.0)
    s = cmd("sep", cmd_sep, "separation query")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--c", default="")
    s.add_argument("--mode", choices=("sigma", "d"), default="sigma")
    s = cmd("im", cmd_im, "independence model by enumeration")
    s.add_argument("--nodes")
    s.add_argument("--max-cond", type=int)
    s.add_argument("--sets", action="store_true")
    s.add_argument("--mode", choices=("sigma", "d"), default="sigma")
    s = cmd("lig", cmd_lig, "local independence graph")
    s.add_argument("--drop", help="marginalise these nodes first")
    s.add_argument("--query", help="certificate query 'A;B;C'")
    s = cmd("docalc", cmd_docalc, "do-calculus rule precondition")
    s.add_argument("--rule", type=int, choices=(1, 2, 3), required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--z", default="")
    s.add_argument("--w", default="")
    s = cmd("fci", cmd_fci, "FCI on an independence model", needs_input=False)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--im", help="independence model file")
    src.add_argument("--from-graph", help="graph or model whose sigma-separations form the model")
    s.add_argument("--nodes")
    s.add_argument("--max-cond", type=int)
    s.add_argument("--selection-bias", action="store_true")
    s = cmd("simulate", cmd_simulate, "Euler-Maruyama simulation")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--paths", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--horizon", type=float)
    s.add_argument("--out", help="write CSV or .npz here instead of CSV to stdout")
    s = cmd("verify", cmd_verify, "run the acceptance checks", needs_input=False)
    s.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    args._failed = False
    try:
        out = args.func(args)
    except ModelError as exc:
        for d in exc.diagnostics:
            sep = ":" if d.line else ": "
            print(f"{getattr(args, 'input', 'model')}{sep}{d}", file=sys.stderr)
        return 1
    except (CliError, GraphError, GuaranteeError, InconsistentModel, SimulationError,
            ValueError, KeyError) as exc:
        print(f"dscm {args.command}: {exc}", file=sys.stderr)
        return 1
    if out is not None:
        print(out, end="" if out.endswith("\n") else "\n")
    return 1 if args._failed else 0


if __name__ == "__main__":
    sys.exit(main())

"""Recursive-descent parser for the model language.

::

    system  := "system" "{" (driver | process)* "horizon" NUMBER ";" "}"
    driver  := "exogenous" NAME ":" ("brownian" | "poisson" "(" NUMBER ")"
               | "time" | "constant" "(" NUMBER ")") ";"
    process := "process" NAME "{" "init" "=" dist ";"
               "alpha" "=" nameset ";" "beta" "=" nameset ";"
               "g" "=" "[" (expr ("," expr)*)? "]" ";"
               ("markov" "=" BOOL ";")? "}"
    dist    := "constant" "(" NUMBER ")" | "normal" "(" NUMBER "," NUMBER ")"
    nameset := "{" (NAME ("," NAME)*)? "}"

``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import expr as E
from .system import (Diagnostic, Dist, DriverSpec, ModelError, ProcessSpec,
                     SdeSystem, validate)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}()\[\];,:=+\-*/])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    out = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelError([Diagnostic(f"unexpected character {text[pos]!r}",
                                         line, pos - line_start + 1)])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        # (name, token) for declarations and references, for diagnostics
        self.decls: List[Tuple[str, Token]] = []
        self.refs: List[Tuple[str, str, Token]] = []

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None) -> ModelError:
        tok = tok or self.cur
        found = tok.text or "end of input"
        return ModelError([Diagnostic(f"{msg} (found {found!r})", tok.line, tok.col)])

    def accept(self, text: str) -> Optional[Token]:
        if self.cur.text == text and self.cur.kind in ("name", "punct"):
            tok = self.cur
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error(f"expected {text!r}")
        return tok

    def name(self) -> Token:
        if self.cur.kind != "name":
            raise self.error("expected a name")
        tok = self.cur
        self.i += 1
        return tok

    def number(self) -> float:
        sign = -1.0 if self.accept("-") else 1.0
        if self.cur.kind != "number":
            raise self.error("expected a number")
        tok = self.cur
        self.i += 1
        return sign * float(tok.text)

    # -- grammar ---------------------------------------------------------
    def system(self) -> SdeSystem:
        start = self.expect("system")
        self.expect("{")
        drivers, procs = [], []
        horizon = None
        while True:
            if self.cur.text == "exogenous":
                drivers.append(self.driver())
            elif self.cur.text == "process":
                procs.append(self.process())
            elif self.cur.text == "horizon":
                self.i += 1
                horizon = self.number()
                self.expect(";")
                self.expect("}")
                break
            elif self.cur.text == "}":
                if not procs:
                    raise ModelError([Diagnostic("system declares no processes",
                                                 start.line, start.col)])
                raise self.error("expected 'horizon NUMBER;' before '}'")
            else:
                raise self.error("expected 'exogenous', 'process' or 'horizon'")
        if self.cur.kind != "eof":
            raise self.error("unexpected text after system")
        if not procs:
            raise ModelError([Diagnostic("system declares no processes",
                                         start.line, start.col)])
        return SdeSystem(tuple(procs), tuple(drivers), horizon)

    def driver(self) -> DriverSpec:
        self.expect("exogenous")
        tok = self.name()
        self.decls.append((tok.text, tok))
        self.expect(":")
        kind_tok = self.name()
        kind = kind_tok.text
        param = 0.0
        if kind in ("poisson", "constant"):
            self.expect("(")
            param = self.number()
            self.expect(")")
        elif kind not in ("brownian", "time"):
            raise self.error("expected brownian, poisson(...), time or constant(...)",
                             kind_tok)
        self.expect(";")
        if kind == "poisson" and not param > 0:
            raise ModelError([Diagnostic("poisson rate must be > 0",
                                         kind_tok.line, kind_tok.col)])
        return DriverSpec(tok.text, kind, param)

    def process(self) -> ProcessSpec:
        self.expect("process")
        tok = self.name()
        name = tok.text
        self.decls.append((name, tok))
        self.expect("{")
        self.expect("init")
        self.expect("=")
        init = self.dist()
        self.expect(";")
        self.expect("alpha")
        self.expect("=")
        alpha = self.nameset(name)
        self.expect(";")
        self.expect("beta")
        self.expect("=")
        beta = self.nameset(name)
        self.expect(";")
        g_tok = self.expect("g")
        self.expect("=")
        self.expect("[")
        gs = []
        if not self.accept("]"):
            gs.append(self.expr(name))
            while self.accept(","):
                gs.append(self.expr(name))
            self.expect("]")
        self.expect(";")
        if len(gs) != len(beta):
            raise ModelError([Diagnostic(
                f"{name}: {len(gs)} integrand(s) for {len(beta)} integrator(s)",
                g_tok.line, g_tok.col)])
        markov = False
        if self.accept("markov"):
            self.expect("=")
            b = self.name()
            if b.text not in ("true", "false"):
                raise self.error("expected true or false", b)
            markov = b.text == "true"
            self.expect(";")
        self.expect("}")
        return ProcessSpec(name, init, tuple(alpha), tuple(beta), tuple(gs), markov)

    def dist(self) -> Dist:
        tok = self.name()
        self.expect("(")
        if tok.text == "constant":
            d = Dist("constant", self.number())
        elif tok.text == "normal":
            mu = self.number()
            self.expect(",")
            d = Dist("normal", mu, self.number())
        else:
            raise self.error("expected constant(...) or normal(...)", tok)
        self.expect(")")
        return d

    def nameset(self, owner: str) -> List[str]:
        self.expect("{")
        names = []
        if not self.accept("}"):
            while True:
                tok = self.name()
                self.refs.append((owner, tok.text, tok))
                names.append(tok.text)
                if self.accept("}"):
                    break
                self.expect(",")
        return names

    def expr(self, owner: str) -> E.Expr:
        left = self.term(owner)
        while self.cur.text in ("+", "-") and self.cur.kind == "punct":
            op = self.cur.text
            self.i += 1
            left = E.BinOp(op, left, self.term(owner))
        return left

    def term(self, owner: str) -> E.Expr:
        left = self.unary(owner)
        while self.cur.text in ("*", "/") and self.cur.kind == "punct":
            op = self.cur.text
            self.i += 1
            left = E.BinOp(op, left, self.unary(owner))
        return left

    def unary(self, owner: str) -> E.Expr:
        if self.accept("-"):
            arg = self.unary(owner)
            # fold literals so printed negative numbers parse back unchanged
            if isinstance(arg, E.Num):
                return E.Num(-arg.value)
            return E.Neg(arg)
        return self.atom(owner)

    def atom(self, owner: str) -> E.Expr:
        tok = self.cur
        if tok.kind == "number":
            self.i += 1
            return E.Num(float(tok.text))
        if self.accept("("):
            e = self.expr(owner)
            self.expect(")")
            return e
        if tok.kind == "name":
            self.i += 1
            if tok.text in E.FUNCTIONS:
                self.expect("(")
                args = [self.expr(owner)]
                while self.accept(","):
                    args.append(self.expr(owner))
                self.expect(")")
                if len(args) != E.FUNCTIONS[tok.text]:
                    raise self.error(f"{tok.text} takes {E.FUNCTIONS[tok.text]} argument(s)",
                                     tok)
                return E.Call(tok.text, tuple(args))
            if tok.text != E.TIME:
                self.refs.append((owner, tok.text, tok))
            return E.Var(tok.text)
        raise self.error("expected an expression")

    def check_names(self):
        errs = []
        declared: Dict[str, Token] = {}
        for name, tok in self.decls:
            if name in declared:
                errs.append(Diagnostic(f"duplicate name {name!r}", tok.line, tok.col))
            declared.setdefault(name, tok)
        for owner, name, tok in self.refs:
            if name not in declared:
                errs.append(Diagnostic(f"{owner}: unresolved name {name!r}",
                                       tok.line, tok.col))
        if errs:
            raise ModelError(errs)


def parse_model(text: str) -> SdeSystem:
    """Parse and validate model source. Raises :class:`ModelError` with
    positioned diagnostics."""
    p = _Parser(text)
    sys = p.system()
    p.check_names()
    return validate(sys)


def print_model(sys: SdeSystem) -> str:
    return sys.to_text()

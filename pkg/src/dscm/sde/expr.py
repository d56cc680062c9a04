"""Arithmetic expressions used as integrands.

Grammar (precedence low to high)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | atom
    atom   := NUMBER | NAME | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

``FUNC`` is one of ``exp``, ``sin``, ``min``, ``max``. The name ``t``
refers to the current time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

TIME = "t"
FUNCTIONS = {"exp": 1, "sin": 1, "min": 2, "max": 2}


class ExprError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: Tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]


def variables(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    return frozenset().union(*(variables(a) for a in e.args))


def uses(e: Expr, ops) -> bool:
    """True if ``e`` contains any operator or function named in ``ops``."""
    if isinstance(e, (Num, Var)):
        return False
    if isinstance(e, Neg):
        return uses(e.arg, ops)
    if isinstance(e, BinOp):
        return e.op in ops or uses(e.left, ops) or uses(e.right, ops)
    return e.fn in ops or any(uses(a, ops) for a in e.args)


def evaluate(e: Expr, env: Dict[str, object]):
    """Evaluate elementwise over numpy arrays (or scalars) in ``env``."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, BinOp):
        a = evaluate(e.left, env)
        b = evaluate(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if np.any(np.asarray(b) == 0):
            raise ExprError("division by zero in integrand")
        return a / b
    args = [evaluate(a, env) for a in e.args]
    if e.fn == "exp":
        return np.exp(args[0])
    if e.fn == "sin":
        return np.sin(args[0])
    if e.fn == "min":
        return np.minimum(args[0], args[1])
    return np.maximum(args[0], args[1])


def to_text(e: Expr) -> str:
    """Fully parenthesised source text that parses back to ``e``."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    return f"{e.fn}({', '.join(to_text(a) for a in e.args)})"

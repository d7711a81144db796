"""Expression trees and their (vectorised) evaluation.

Expressions are immutable dataclasses. :func:`evaluate` works on plain
Python scalars as well as on numpy arrays, so the same tree can be used
to evaluate a guard in one state during exploration or a proposition
over every state of a built chain at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from ..errors import ModelError


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Literal(Expr):
    value: bool | int | float


@dataclass(frozen=True)
class Ident(Expr):
    name: str


@dataclass(frozen=True)
class LabelRef(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "!" or "-"
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Ite(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


TRUE = Literal(True)
FALSE = Literal(False)

BOOLEAN_OPS = frozenset({"&", "|", "=>", "<=>"})
RELATIONAL_OPS = frozenset({"=", "!=", "<", "<=", ">", ">="})
ARITHMETIC_OPS = frozenset({"+", "-", "*", "/"})


def _div(a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.true_divide(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else _scalar_div(a, b)


def _scalar_div(a, b):
    if b == 0:
        if a == 0:
            return math.nan
        return math.copysign(math.inf, a) * (1 if b >= 0 else -1)
    return a / b


def _ln(x):
    if isinstance(x, np.ndarray):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(x)
    if x <= 0:
        return -math.inf if x == 0 else math.nan
    return math.log(x)


def _log(x, base=None):
    if base is None:
        return _ln(x)
    return _div(_ln(x), _ln(base))


def _exp(x):
    return np.exp(x) if isinstance(x, np.ndarray) else math.exp(x)


def _pow(x, y):
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return np.power(np.asarray(x, dtype=float), y)
    return float(x) ** y if isinstance(y, float) or (isinstance(y, int) and y < 0) else x**y


def _floor(x):
    return np.floor(x).astype(np.int64) if isinstance(x, np.ndarray) else math.floor(x)


def _ceil(x):
    return np.ceil(x).astype(np.int64) if isinstance(x, np.ndarray) else math.ceil(x)


def _min(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = np.minimum(out, x) if isinstance(out, np.ndarray) or isinstance(x, np.ndarray) else min(out, x)
    return out


def _max(*xs):
    out = xs[0]
    for x in xs[1:]:
        out = np.maximum(out, x) if isinstance(out, np.ndarray) or isinstance(x, np.ndarray) else max(out, x)
    return out


def _mod(a, b):
    return np.mod(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else a % b


FUNCTIONS: dict[str, tuple[Callable[..., Any], int, int]] = {
    # name: (implementation, min arity, max arity)
    "ln": (_ln, 1, 1),
    "log": (_log, 1, 2),
    "exp": (_exp, 1, 1),
    "pow": (_pow, 2, 2),
    "floor": (_floor, 1, 1),
    "ceil": (_ceil, 1, 1),
    "min": (_min, 1, 64),
    "max": (_max, 1, 64),
    "mod": (_mod, 2, 2),
}


def _is_array(*xs) -> bool:
    return any(isinstance(x, np.ndarray) for x in xs)


def apply_unary(op: str, value):
    if op == "!":
        return np.logical_not(value) if _is_array(value) else not value
    if op == "-":
        return -value
    raise ValueError(f"unknown unary operator {op!r}")


def apply_binary(op: str, a, b):
    vec = _is_array(a, b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return _div(a, b)
    if op == "&":
        return np.logical_and(a, b) if vec else bool(a) and bool(b)
    if op == "|":
        return np.logical_or(a, b) if vec else bool(a) or bool(b)
    if op == "=>":
        return np.logical_or(np.logical_not(a), b) if vec else (not a) or bool(b)
    if op == "<=>":
        return np.equal(np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)) if vec else bool(a) == bool(b)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown binary operator {op!r}")


def apply_call(func: str, args: list):
    impl, _, _ = FUNCTIONS[func]
    return impl(*args)


def apply_ite(cond, then, orelse):
    if _is_array(cond, then, orelse):
        return np.where(cond, then, orelse)
    return then if cond else orelse


def evaluate(
    expr: Expr,
    env: Mapping[str, Any],
    labels: Mapping[str, Expr] | None = None,
    extension: Callable[[Expr], Any] | None = None,
):
    """Evaluate ``expr`` with identifiers looked up in ``env``.

    ``labels`` resolves ``"name"`` references; ``extension`` is called for
    node types this module does not know (the CSL operators).
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Ident):
        try:
            return env[expr.name]
        except KeyError:
            raise ModelError(f"undefined identifier {expr.name!r}") from None
    if isinstance(expr, Binary):
        a = evaluate(expr.left, env, labels, extension)
        if not _is_array(a):
            # short-circuit keeps guards like `s>0 & 1/s>1` safe
            if expr.op == "&" and not a:
                return False
            if expr.op == "|" and a:
                return True
            if expr.op == "=>" and not a:
                return True
        b = evaluate(expr.right, env, labels, extension)
        return apply_binary(expr.op, a, b)
    if isinstance(expr, Unary):
        return apply_unary(expr.op, evaluate(expr.operand, env, labels, extension))
    if isinstance(expr, Call):
        return apply_call(expr.func, [evaluate(a, env, labels, extension) for a in expr.args])
    if isinstance(expr, Ite):
        cond = evaluate(expr.cond, env, labels, extension)
        if not _is_array(cond):
            return evaluate(expr.then if cond else expr.orelse, env, labels, extension)
        return apply_ite(
            cond,
            evaluate(expr.then, env, labels, extension),
            evaluate(expr.orelse, env, labels, extension),
        )
    if isinstance(expr, LabelRef):
        if labels is None or expr.name not in labels:
            raise ModelError(f"undefined label {expr.name!r}")
        return evaluate(labels[expr.name], env, labels, extension)
    if extension is not None:
        return extension(expr)
    raise ModelError(f"cannot evaluate {type(expr).__name__} here")


def children(expr: Expr) -> tuple[Expr, ...]:
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, Binary):
        return (expr.left, expr.right)
    if isinstance(expr, Call):
        return expr.args
    if isinstance(expr, Ite):
        return (expr.cond, expr.then, expr.orelse)
    sub = getattr(expr, "subexpressions", None)
    return sub() if sub is not None else ()


def identifiers(expr: Expr) -> set[str]:
    """Names of all identifiers occurring in ``expr``."""
    found: set[str] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Ident):
            found.add(node.name)
        stack.extend(children(node))
    return found


def substitute(expr: Expr, values: Mapping[str, Any]) -> Expr:
    """Replace identifiers bound in ``values`` by literals."""
    if isinstance(expr, Ident):
        return Literal(values[expr.name]) if expr.name in values else expr
    if isinstance(expr, Unary):
        return Unary(expr.op, substitute(expr.operand, values))
    if isinstance(expr, Binary):
        return Binary(expr.op, substitute(expr.left, values), substitute(expr.right, values))
    if isinstance(expr, Call):
        return Call(expr.func, tuple(substitute(a, values) for a in expr.args))
    if isinstance(expr, Ite):
        return Ite(substitute(expr.cond, values), substitute(expr.then, values), substitute(expr.orelse, values))
    replace = getattr(expr, "map_subexpressions", None)
    if replace is not None:
        return replace(lambda e: substitute(e, values))
    return expr


def fold(expr: Expr) -> Expr:
    """Collapse constant subtrees into literals (identifiers stay symbolic)."""
    if isinstance(expr, (Literal, Ident, LabelRef)):
        return expr
    if isinstance(expr, Unary):
        inner = fold(expr.operand)
        if isinstance(inner, Literal):
            return Literal(_py(apply_unary(expr.op, inner.value)))
        return Unary(expr.op, inner)
    if isinstance(expr, Binary):
        left, right = fold(expr.left), fold(expr.right)
        if isinstance(left, Literal) and isinstance(right, Literal):
            return Literal(_py(apply_binary(expr.op, left.value, right.value)))
        return Binary(expr.op, left, right)
    if isinstance(expr, Call):
        args = tuple(fold(a) for a in expr.args)
        if all(isinstance(a, Literal) for a in args):
            return Literal(_py(apply_call(expr.func, [a.value for a in args])))
        return Call(expr.func, args)
    if isinstance(expr, Ite):
        cond, then, orelse = fold(expr.cond), fold(expr.then), fold(expr.orelse)
        if isinstance(cond, Literal):
            return then if cond.value else orelse
        return Ite(cond, then, orelse)
    replace = getattr(expr, "map_subexpressions", None)
    if replace is not None:
        return replace(fold)
    return expr


def _py(value):
    if isinstance(value, np.generic):
        return value.item()
    return value

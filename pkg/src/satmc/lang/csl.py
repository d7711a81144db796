"""CSL operators layered on top of the expression language.

A property is an :class:`~satmc.lang.expr.Expr` tree in which the
probabilistic (``P``), steady-state (``S``) and cumulative-reward (``R``)
operators may appear as primaries. Boolean connectives and arithmetic
around them are ordinary expression nodes, so ``!(s=5) & true`` and
``(R{"a"}=?[C<=T])/T`` need no extra machinery. Path formulas (``X``,
``U``; ``F`` is sugar for ``true U``) only occur directly under ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .expr import Binary, Expr, Ite, Literal, TRUE, Unary, Call, children

COMPARISONS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class Interval:
    """Time interval ``[lower, upper]``; ``upper=None`` means unbounded."""

    lower: Expr = Literal(0)
    upper: Expr | None = None

    def subexpressions(self) -> tuple[Expr, ...]:
        return (self.lower,) if self.upper is None else (self.lower, self.upper)

    def map_subexpressions(self, f: Callable[[Expr], Expr]) -> "Interval":
        return Interval(f(self.lower), None if self.upper is None else f(self.upper))


UNBOUNDED = Interval()


@dataclass(frozen=True)
class Bound:
    op: str  # one of COMPARISONS
    threshold: Expr


class PathFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Next(PathFormula):
    operand: Expr
    interval: Interval = UNBOUNDED

    def subexpressions(self):
        return (self.operand, *self.interval.subexpressions())

    def map_subexpressions(self, f):
        return Next(f(self.operand), self.interval.map_subexpressions(f))


@dataclass(frozen=True)
class Until(PathFormula):
    left: Expr
    right: Expr
    interval: Interval = UNBOUNDED

    def subexpressions(self):
        return (self.left, self.right, *self.interval.subexpressions())

    def map_subexpressions(self, f):
        return Until(f(self.left), f(self.right), self.interval.map_subexpressions(f))


def eventually(target: Expr, interval: Interval = UNBOUNDED) -> Until:
    return Until(TRUE, target, interval)


class Query(Expr):
    """Common base of the P, S and R operators."""

    __slots__ = ()


@dataclass(frozen=True)
class ProbQuery(Query):
    path: PathFormula
    bound: Bound | None = None  # None for P=?

    def subexpressions(self):
        extra = () if self.bound is None else (self.bound.threshold,)
        return (*self.path.subexpressions(), *extra)

    def map_subexpressions(self, f):
        bound = None if self.bound is None else Bound(self.bound.op, f(self.bound.threshold))
        return ProbQuery(self.path.map_subexpressions(f), bound)


@dataclass(frozen=True)
class SteadyQuery(Query):
    operand: Expr
    bound: Bound | None = None

    def subexpressions(self):
        extra = () if self.bound is None else (self.bound.threshold,)
        return (self.operand, *extra)

    def map_subexpressions(self, f):
        bound = None if self.bound is None else Bound(self.bound.op, f(self.bound.threshold))
        return SteadyQuery(f(self.operand), bound)


@dataclass(frozen=True)
class RewardQuery(Query):
    """``R{"name"}=?[C<=time]``; ``name=None`` selects the first reward structure."""

    time: Expr
    name: str | None = None
    bound: Bound | None = None

    def subexpressions(self):
        extra = () if self.bound is None else (self.bound.threshold,)
        return (self.time, *extra)

    def map_subexpressions(self, f):
        bound = None if self.bound is None else Bound(self.bound.op, f(self.bound.threshold))
        return RewardQuery(f(self.time), self.name, bound)


def queries(expr: Expr) -> list[Query]:
    """All P/S/R operators in ``expr``, outermost first."""
    found: list[Query] = []
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Query):
            found.append(node)
        stack.extend(reversed(children(node)))
    return found


def is_numeric_query(expr: Expr) -> bool:
    """True when the property yields a number rather than a truth value."""
    if isinstance(expr, Query):
        return expr.bound is None
    if isinstance(expr, Binary):
        return expr.op in ("+", "-", "*", "/") and (is_numeric_query(expr.left) or is_numeric_query(expr.right))
    if isinstance(expr, Unary):
        return expr.op == "-" and is_numeric_query(expr.operand)
    if isinstance(expr, Call):
        return any(is_numeric_query(a) for a in expr.args)
    if isinstance(expr, Ite):
        return is_numeric_query(expr.then) or is_numeric_query(expr.orelse)
    return False

"""Resolve constants against a set of overrides."""

from __future__ import annotations

import dataclasses
from typing import Any, Mapping

from ..errors import ModelError
from .ast import Command, ConstantDecl, LabelDecl, ModelAst, Module, RewardDecl, RewardItem, Update, VariableDecl
from .expr import Expr, Literal, evaluate, fold, identifiers, substitute
from .validate import coerce_constant, constant_order


def constant_values(ast: ModelAst, overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Evaluate every constant, applying ``overrides`` first.

    Raises :class:`ModelError` for unknown override names and for
    constants left without a value.
    """
    overrides = dict(overrides or {})
    declared = {c.name: c for c in ast.constants}
    for name in overrides:
        if name not in declared:
            raise ModelError(f"unknown constant {name!r}")
    values: dict[str, Any] = {}
    for name in constant_order(ast):
        decl = declared[name]
        if name in overrides:
            raw = overrides[name]
        elif decl.value is not None:
            raw = evaluate(decl.value, values)
        else:
            raise ModelError(f"constant {name!r} has no value; supply an override", *_where(decl))
        values[name] = coerce_constant(decl.type, _number(raw), name)
    return values


def _where(decl) -> tuple:
    return () if decl.loc is None else (decl.loc.line, decl.loc.column)


def _number(raw):
    if isinstance(raw, str):
        text = raw.strip()
        if text in ("true", "false"):
            return text == "true"
        try:
            return int(text)
        except ValueError:
            return float(text)
    if hasattr(raw, "item"):
        return raw.item()
    return raw


def bind_constants(ast: ModelAst, overrides: Mapping[str, Any] | None = None) -> ModelAst:
    """Return a copy of ``ast`` with every constant reference replaced by its value.

    Constant declarations keep their names but carry literal values, so a
    bound model still prints and reparses. Rates that no longer depend on
    state variables must come out strictly positive.
    """
    values = constant_values(ast, overrides)

    def sub(e: Expr) -> Expr:
        return fold(substitute(e, values))

    constants = tuple(
        ConstantDecl(c.name, c.type, Literal(values[c.name]), c.loc) for c in ast.constants
    )

    def var(v: VariableDecl) -> VariableDecl:
        low, high = sub(v.low), sub(v.high)
        init = sub(v.init if v.init is not None else v.low)
        lo, hi, ini = (e.value for e in (low, high, init))
        if not lo <= ini <= hi:
            raise ModelError(f"initial value {ini} of {v.name!r} outside range [{lo}..{hi}]", *_where(v))
        return VariableDecl(v.name, low, high, init, v.loc)

    def command(c: Command) -> Command:
        updates = []
        for u in c.updates:
            rate = sub(u.rate)
            if isinstance(rate, Literal) and not (rate.value > 0 and rate.value < float("inf")):
                raise ModelError(f"nonpositive resolved rate {rate.value!r}", *_where(c))
            updates.append(Update(rate, tuple((n, sub(e)) for n, e in u.assignments)))
        return Command(c.action, sub(c.guard), tuple(updates), c.loc)

    modules = tuple(
        Module(m.name, tuple(var(v) for v in m.variables), tuple(command(c) for c in m.commands), m.loc)
        for m in ast.modules
    )
    rewards = tuple(
        RewardDecl(
            r.name,
            tuple(RewardItem(sub(i.guard), sub(i.value), i.transition, i.action, i.loc) for i in r.items),
            r.loc,
        )
        for r in ast.rewards
    )
    labels = tuple(LabelDecl(label.name, sub(label.expr), label.loc) for label in ast.labels)
    return dataclasses.replace(
        ast,
        constants=constants,
        globals=tuple(var(v) for v in ast.globals),
        modules=modules,
        rewards=rewards,
        labels=labels,
    )


def free_identifiers(ast: ModelAst) -> set[str]:
    """Identifiers other than variables still referenced anywhere (empty once bound)."""
    var_names = {v.name for v in ast.variables}
    found: set[str] = set()
    for m in ast.modules:
        for c in m.commands:
            found |= identifiers(c.guard)
            for u in c.updates:
                found |= identifiers(u.rate)
                for _, e in u.assignments:
                    found |= identifiers(e)
    return found - var_names

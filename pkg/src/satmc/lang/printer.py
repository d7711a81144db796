"""Pretty printer; output reparses to a structurally identical tree."""

from __future__ import annotations

from .ast import ModelAst, Update, VariableDecl
from .csl import Interval, Next, ProbQuery, RewardQuery, SteadyQuery
from .expr import Binary, Call, Expr, Ident, Ite, LabelRef, Literal, Unary


def format_literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    text = repr(float(value))
    return text if ("." in text or "e" in text) else text + ".0"


def _wrap(expr: Expr) -> str:
    text = format_expr(expr)
    if isinstance(expr, (Binary, Ite, Unary)) or (isinstance(expr, Literal) and not isinstance(expr.value, bool) and expr.value < 0):
        return f"({text})"
    return text


def _interval(interval: Interval) -> str:
    if interval.upper is None:
        if isinstance(interval.lower, Literal) and interval.lower.value == 0:
            return ""
        return f">={_wrap(interval.lower)}"
    return f"[{format_expr(interval.lower)},{format_expr(interval.upper)}]"


def _bound(q) -> str:
    if q.bound is None:
        return "=?"
    return f"{q.bound.op}{_wrap(q.bound.threshold)}"


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Literal):
        return format_literal(expr.value)
    if isinstance(expr, Ident):
        return expr.name
    if isinstance(expr, LabelRef):
        return f'"{expr.name}"'
    if isinstance(expr, Unary):
        return f"{expr.op}{_wrap(expr.operand)}"
    if isinstance(expr, Binary):
        return f"{_wrap(expr.left)} {expr.op} {_wrap(expr.right)}"
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(format_expr(a) for a in expr.args)})"
    if isinstance(expr, Ite):
        return f"{_wrap(expr.cond)} ? {_wrap(expr.then)} : {_wrap(expr.orelse)}"
    if isinstance(expr, ProbQuery):
        path = expr.path
        if isinstance(path, Next):
            body = f"X{_interval(path.interval)} {_wrap(path.operand)}"
        else:
            body = f"{_wrap(path.left)} U{_interval(path.interval)} {_wrap(path.right)}"
        return f"P{_bound(expr)}[{body}]"
    if isinstance(expr, SteadyQuery):
        return f"S{_bound(expr)}[{format_expr(expr.operand)}]"
    if isinstance(expr, RewardQuery):
        name = "" if expr.name is None else f'{{"{expr.name}"}}'
        return f"R{name}{_bound(expr)}[C<={_wrap(expr.time)}]"
    raise TypeError(f"cannot format {type(expr).__name__}")


format_property = format_expr


def _variable(v: VariableDecl) -> str:
    init = "" if v.init is None else f" init {format_expr(v.init)}"
    return f"{v.name} : [{format_expr(v.low)}..{format_expr(v.high)}]{init};"


def _update(u: Update) -> str:
    if not u.assignments:
        body = "true"
    else:
        body = " & ".join(f"({name}'={format_expr(e)})" for name, e in u.assignments)
    return f"{_wrap(u.rate)}:{body}"


def format_model(ast: ModelAst) -> str:
    lines = [ast.model_type, ""]
    for c in ast.constants:
        value = "" if c.value is None else f" = {format_expr(c.value)}"
        lines.append(f"const {c.type} {c.name}{value};")
    if ast.constants:
        lines.append("")
    for v in ast.globals:
        lines.append(f"global {_variable(v)}")
    if ast.globals:
        lines.append("")
    for m in ast.modules:
        lines.append(f"module {m.name}")
        for v in m.variables:
            lines.append(f"    {_variable(v)}")
        if m.variables and m.commands:
            lines.append("")
        for cmd in m.commands:
            action = cmd.action or ""
            updates = " + ".join(_update(u) for u in cmd.updates)
            lines.append(f"    [{action}] {format_expr(cmd.guard)} -> {updates};")
        lines.append("endmodule")
        lines.append("")
    for rs in ast.rewards:
        lines.append(f'rewards "{rs.name}"')
        for item in rs.items:
            prefix = f"[{item.action or ''}] " if item.transition else ""
            lines.append(f"    {prefix}{format_expr(item.guard)} : {format_expr(item.value)};")
        lines.append("endrewards")
        lines.append("")
    for label in ast.labels:
        lines.append(f'label "{label.name}" = {format_expr(label.expr)};')
    return "\n".join(lines).rstrip() + "\n"

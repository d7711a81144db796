"""Static checks run right after parsing."""

from __future__ import annotations

from ..errors import ModelError
from .ast import Location, ModelAst
from .csl import Interval, Next, ProbQuery, Query, SteadyQuery, Until, queries
from .expr import Expr, LabelRef, Literal, children, evaluate, fold, identifiers


def _err(message: str, loc: Location | None) -> ModelError:
    if loc is None:
        return ModelError(message)
    return ModelError(message, loc.line, loc.column)


def constant_order(ast: ModelAst) -> list[str]:
    """Topological order of constant definitions; raises on cycles."""
    defined = {c.name: c for c in ast.constants}
    order: list[str] = []
    state: dict[str, int] = {}  # 1 visiting, 2 done

    def visit(name: str, path: tuple[str, ...]) -> None:
        mark = state.get(name)
        if mark == 2:
            return
        if mark == 1:
            cycle = " -> ".join(path + (name,))
            raise _err(f"cyclic constant definition: {cycle}", defined[name].loc)
        state[name] = 1
        decl = defined[name]
        if decl.value is not None:
            for dep in sorted(identifiers(decl.value)):
                if dep not in defined:
                    raise _err(f"constant {name!r} refers to unknown constant {dep!r}", decl.loc)
                visit(dep, path + (name,))
        state[name] = 2
        order.append(name)

    for decl in ast.constants:
        visit(decl.name, ())
    return order


def known_constant_values(ast: ModelAst) -> dict[str, object]:
    """Values of the constants that are defined without overrides."""
    defined = {c.name: c for c in ast.constants}
    values: dict[str, object] = {}
    for name in constant_order(ast):
        decl = defined[name]
        if decl.value is None or not identifiers(decl.value) <= values.keys():
            continue
        values[name] = coerce_constant(decl.type, evaluate(decl.value, values), name)
    return values


def coerce_constant(ctype: str, value, name: str):
    if ctype == "int":
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ModelError(f"constant {name!r} is declared int but has value {value!r}")
        return int(value)
    if ctype == "double":
        if isinstance(value, bool):
            raise ModelError(f"constant {name!r} is declared double but has value {value!r}")
        return float(value)
    if not isinstance(value, bool):
        raise ModelError(f"constant {name!r} is declared bool but has value {value!r}")
    return value


def check_model(ast: ModelAst) -> None:
    seen: dict[str, str] = {}

    def claim(name: str, kind: str, loc: Location | None) -> None:
        if name in seen:
            raise _err(f"duplicate identifier {name!r} ({kind} clashes with {seen[name]})", loc)
        seen[name] = kind

    for c in ast.constants:
        claim(c.name, "constant", c.loc)
    for v in ast.variables:
        claim(v.name, "variable", v.loc)

    module_names: set[str] = set()
    for m in ast.modules:
        if m.name in module_names:
            raise _err(f"duplicate module {m.name!r}", m.loc)
        module_names.add(m.name)
    for kind, decls in (("reward structure", ast.rewards), ("label", ast.labels)):
        names: set[str] = set()
        for d in decls:
            if d.name in names:
                raise _err(f"duplicate {kind} {d.name!r}", d.loc)
            names.add(d.name)

    constants = known_constant_values(ast)
    const_names = {c.name for c in ast.constants}
    var_names = {v.name for v in ast.variables}
    label_names = {label.name for label in ast.labels}
    global_names = {v.name for v in ast.globals}

    def check_names(expr: Expr, loc: Location | None, allow_vars: bool = True) -> None:
        allowed = const_names | var_names if allow_vars else const_names
        for name in identifiers(expr):
            if name not in allowed:
                what = "unknown identifier" if allow_vars else "non-constant identifier"
                raise _err(f"{what} {name!r}", loc)

    for v in ast.variables:
        for e in (v.low, v.high) + ((v.init,) if v.init is not None else ()):
            check_names(e, v.loc, allow_vars=False)
        exprs = (v.low, v.high, v.init if v.init is not None else v.low)
        if all(identifiers(e) <= constants.keys() for e in exprs):
            low, high, init = (evaluate(e, constants) for e in exprs)
            if low > high:
                raise _err(f"empty range [{low}..{high}] for variable {v.name!r}", v.loc)
            if not low <= init <= high:
                raise _err(f"initial value {init} of {v.name!r} outside range [{low}..{high}]", v.loc)

    for m in ast.modules:
        own = {v.name for v in m.variables} | global_names
        for cmd in m.commands:
            check_names(cmd.guard, cmd.loc)
            for upd in cmd.updates:
                check_names(upd.rate, cmd.loc)
                targets = [name for name, _ in upd.assignments]
                if len(set(targets)) != len(targets):
                    raise _err("variable assigned twice in one update", cmd.loc)
                for name, value in upd.assignments:
                    if name not in var_names:
                        raise _err(f"update of unknown variable {name!r}", cmd.loc)
                    if name not in own:
                        raise _err(f"module {m.name!r} cannot update variable {name!r}", cmd.loc)
                    check_names(value, cmd.loc)
                if not identifiers(upd.rate):
                    rate = fold(upd.rate)
                    if isinstance(rate, Literal) and not rate.value > 0:
                        raise _err(f"rate must be positive, got {rate.value!r}", cmd.loc)

    actions = ast.actions
    for rs in ast.rewards:
        for item in rs.items:
            check_names(item.guard, item.loc)
            check_names(item.value, item.loc)
            if item.transition and item.action is not None and item.action not in actions:
                raise _err(f"reward {rs.name!r} uses action {item.action!r} that labels no command", item.loc)
    for label in ast.labels:
        check_names(label.expr, label.loc)
        for ref in _label_refs(label.expr):
            if ref not in label_names:
                raise _err(f"unknown label {ref!r}", label.loc)


def _label_refs(expr: Expr) -> set[str]:
    found, stack = set(), [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, LabelRef):
            found.add(node.name)
        stack.extend(children(node))
    return found


def _check_interval(interval: Interval) -> None:
    lower = interval.lower
    upper = interval.upper
    if isinstance(lower, Literal) and lower.value < 0:
        raise ModelError(f"interval lower bound {lower.value} is negative")
    if isinstance(lower, Literal) and isinstance(upper, Literal) and upper.value < lower.value:
        raise ModelError(f"empty interval [{lower.value},{upper.value}]")


def check_property(expr: Expr) -> None:
    for q in queries(expr):
        check_query(q)


def check_query(q: Query) -> None:
    bound = q.bound
    if bound is not None and isinstance(bound.threshold, Literal):
        value = bound.threshold.value
        if isinstance(q, (ProbQuery, SteadyQuery)) and not 0 <= value <= 1:
            raise ModelError(f"probability bound {value} outside [0,1]")
    if isinstance(q, ProbQuery):
        path = q.path
        if isinstance(path, (Next, Until)):
            _check_interval(path.interval)

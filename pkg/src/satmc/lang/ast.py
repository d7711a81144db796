"""Syntax tree of a guarded-command model."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import Expr, Literal


@dataclass(frozen=True)
class Location:
    line: int
    column: int


@dataclass(frozen=True)
class ConstantDecl:
    name: str
    type: str  # "int", "double" or "bool"
    value: Expr | None  # None: must be supplied by an override
    loc: Location | None = field(default=None, compare=False)


@dataclass(frozen=True)
class VariableDecl:
    name: str
    low: Expr
    high: Expr
    init: Expr | None  # None: defaults to the lower bound
    loc: Location | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Update:
    """One ``rate : (x'=e) & ...`` alternative of a command."""

    rate: Expr
    assignments: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class Command:
    action: str | None  # None for ``[]``
    guard: Expr
    updates: tuple[Update, ...]
    loc: Location | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Module:
    name: str
    variables: tuple[VariableDecl, ...]
    commands: tuple[Command, ...]
    loc: Location | None = field(default=None, compare=False)

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(c.action for c in self.commands if c.action is not None)


@dataclass(frozen=True)
class RewardItem:
    guard: Expr
    value: Expr
    transition: bool = False  # True for ``[action] guard : value``
    action: str | None = None  # None together with transition=True means ``[]``
    loc: Location | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RewardDecl:
    name: str
    items: tuple[RewardItem, ...]
    loc: Location | None = field(default=None, compare=False)


@dataclass(frozen=True)
class LabelDecl:
    name: str
    expr: Expr
    loc: Location | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ModelAst:
    constants: tuple[ConstantDecl, ...] = ()
    globals: tuple[VariableDecl, ...] = ()
    modules: tuple[Module, ...] = ()
    rewards: tuple[RewardDecl, ...] = ()
    labels: tuple[LabelDecl, ...] = ()
    model_type: str = "ctmc"

    @property
    def variables(self) -> tuple[VariableDecl, ...]:
        """Global variables first, then each module's locals in declaration order."""
        out = list(self.globals)
        for module in self.modules:
            out.extend(module.variables)
        return tuple(out)

    @property
    def actions(self) -> frozenset[str]:
        acts: set[str] = set()
        for module in self.modules:
            acts |= module.alphabet
        return frozenset(acts)

    def constant(self, name: str) -> ConstantDecl:
        for decl in self.constants:
            if decl.name == name:
                return decl
        raise KeyError(name)

    def reward(self, name: str) -> RewardDecl:
        for decl in self.rewards:
            if decl.name == name:
                return decl
        raise KeyError(name)

    @property
    def is_bound(self) -> bool:
        """True when every constant carries a literal value (see ``bind_constants``)."""
        return all(isinstance(c.value, Literal) for c in self.constants)

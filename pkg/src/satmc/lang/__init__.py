"""Guarded-command model language and CSL property language."""

from .ast import (
    Command,
    ConstantDecl,
    LabelDecl,
    Location,
    ModelAst,
    Module,
    RewardDecl,
    RewardItem,
    Update,
    VariableDecl,
)
from .binding import bind_constants, constant_values
from .csl import (
    Bound,
    Interval,
    Next,
    PathFormula,
    ProbQuery,
    Query,
    RewardQuery,
    SteadyQuery,
    Until,
    eventually,
    is_numeric_query,
)
from .expr import TRUE, Binary, Call, Expr, Ident, Ite, LabelRef, Literal, Unary, evaluate
from .parser import parse_expression, parse_model, parse_properties, parse_property
from .printer import format_expr, format_model, format_property

__all__ = [
    "Binary",
    "Bound",
    "Call",
    "Command",
    "ConstantDecl",
    "Expr",
    "Ident",
    "Interval",
    "Ite",
    "LabelDecl",
    "LabelRef",
    "Literal",
    "Location",
    "ModelAst",
    "Module",
    "Next",
    "PathFormula",
    "ProbQuery",
    "Query",
    "RewardDecl",
    "RewardItem",
    "RewardQuery",
    "SteadyQuery",
    "TRUE",
    "Unary",
    "Until",
    "Update",
    "VariableDecl",
    "bind_constants",
    "constant_values",
    "evaluate",
    "eventually",
    "format_expr",
    "format_model",
    "format_property",
    "is_numeric_query",
    "parse_expression",
    "parse_model",
    "parse_properties",
    "parse_property",
]

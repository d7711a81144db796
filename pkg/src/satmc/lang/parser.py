"""Recursive-descent parser for models and CSL properties."""

from __future__ import annotations

from ..errors import ModelError, ParseError
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
from .csl import COMPARISONS, Bound, Interval, Next, ProbQuery, RewardQuery, SteadyQuery, Until, eventually
from .expr import FUNCTIONS, Binary, Call, Expr, Ident, Ite, LabelRef, Literal, Unary
from .lexer import Token, TokenStream
from . import validate

_RELATIONAL = ("=", "!=", "<", "<=", ">", ">=")


def _loc(tok: Token) -> Location:
    return Location(tok.line, tok.column)


class _Parser:
    def __init__(self, source: str, properties: bool = False) -> None:
        self.ts = TokenStream(source)
        self.properties = properties

    # -- expressions -------------------------------------------------------

    def expression(self) -> Expr:
        cond = self.iff()
        if self.ts.accept("?"):
            then = self.expression()
            self.ts.expect(":")
            orelse = self.expression()
            return Ite(cond, then, orelse)
        return cond

    def iff(self) -> Expr:
        left = self.implies()
        while self.ts.accept("<=>"):
            left = Binary("<=>", left, self.implies())
        return left

    def implies(self) -> Expr:
        left = self.disjunction()
        if self.ts.accept("=>"):
            return Binary("=>", left, self.implies())
        return left

    def disjunction(self) -> Expr:
        left = self.conjunction()
        while self.ts.accept("|"):
            left = Binary("|", left, self.conjunction())
        return left

    def conjunction(self) -> Expr:
        left = self.negation()
        while self.ts.at("&"):
            self.ts.advance()
            left = Binary("&", left, self.negation())
        return left

    def negation(self) -> Expr:
        if self.ts.accept("!"):
            return Unary("!", self.negation())
        return self.relation()

    def relation(self) -> Expr:
        left = self.additive()
        tok = self.ts.current
        if tok.kind == "OP" and tok.text in _RELATIONAL:
            self.ts.advance()
            return Binary(tok.text, left, self.additive())
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.ts.current.kind == "OP" and self.ts.current.text in ("+", "-"):
            op = self.ts.advance().text
            left = Binary(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.ts.current.kind == "OP" and self.ts.current.text in ("*", "/"):
            op = self.ts.advance().text
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.ts.accept("-"):
            return Unary("-", self.unary())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.ts.current
        if tok.kind == "NUMBER":
            self.ts.advance()
            text = tok.text
            if "." in text or "e" in text or "E" in text:
                return Literal(float(text))
            return Literal(int(text))
        if tok.kind == "KEYWORD" and tok.text in ("true", "false"):
            self.ts.advance()
            return Literal(tok.text == "true")
        if tok.kind == "STRING":
            self.ts.advance()
            return LabelRef(tok.text[1:-1])
        if tok.kind == "OP" and tok.text == "(":
            self.ts.advance()
            inner = self.expression()
            self.ts.expect(")")
            return inner
        if tok.kind == "IDENT":
            if self.properties and self._at_query():
                return self.query()
            self.ts.advance()
            if self.ts.at("("):
                return self.call(tok)
            return Ident(tok.text)
        raise self.ts.error("expected an expression")

    def call(self, name: Token) -> Expr:
        if name.text not in FUNCTIONS:
            raise ParseError(f"unknown function {name.text!r}", name.line, name.column)
        self.ts.expect("(")
        args = [self.expression()]
        while self.ts.accept(","):
            args.append(self.expression())
        self.ts.expect(")")
        _, lo, hi = FUNCTIONS[name.text]
        if not lo <= len(args) <= hi:
            raise ParseError(f"wrong number of arguments to {name.text}", name.line, name.column)
        return Call(name.text, tuple(args))

    # -- CSL -----------------------------------------------------------------

    def _at_query(self) -> bool:
        tok, nxt = self.ts.current, self.ts.peek()
        if tok.text in ("P", "S"):
            return nxt.kind == "OP" and (nxt.text == "=?" or nxt.text in COMPARISONS)
        if tok.text == "R":
            return nxt.kind == "OP" and (nxt.text in ("{", "=?") or nxt.text in COMPARISONS)
        return False

    def _bound(self) -> Bound | None:
        if self.ts.accept("=?"):
            return None
        tok = self.ts.current
        if tok.kind == "OP" and tok.text in COMPARISONS:
            self.ts.advance()
            return Bound(tok.text, self.additive())
        raise self.ts.error("expected '=?' or a comparison")

    def query(self) -> Expr:
        head = self.ts.advance()
        if head.text == "R":
            name = None
            if self.ts.accept("{"):
                name_tok = self.ts.expect_kind("STRING", "reward structure name")
                name = name_tok.text[1:-1]
                self.ts.expect("}")
            bound = self._bound()
            self.ts.expect("[")
            c = self.ts.current
            if not (c.kind == "IDENT" and c.text == "C"):
                raise self.ts.error("expected cumulative reward 'C<=t'")
            self.ts.advance()
            self.ts.expect("<=")
            time = self.additive()
            self.ts.expect("]")
            return RewardQuery(time, name, bound)
        bound = self._bound()
        self.ts.expect("[")
        if head.text == "S":
            operand = self.expression()
            self.ts.expect("]")
            return SteadyQuery(operand, bound)
        path = self.path()
        self.ts.expect("]")
        return ProbQuery(path, bound)

    def _at_ident(self, text: str) -> bool:
        tok = self.ts.current
        return tok.kind == "IDENT" and tok.text == text

    def interval(self) -> Interval:
        tok = self.ts.current
        if tok.kind == "OP" and tok.text in ("<=", "<"):
            self.ts.advance()
            return Interval(Literal(0), self.additive())
        if tok.kind == "OP" and tok.text in (">=", ">"):
            self.ts.advance()
            return Interval(self.additive(), None)
        if tok.kind == "OP" and tok.text == "[":
            self.ts.advance()
            lower = self.expression()
            self.ts.expect(",")
            upper = self.expression()
            self.ts.expect("]")
            return Interval(lower, upper)
        return Interval()

    def path(self):
        if self._at_ident("X"):
            self.ts.advance()
            interval = self.interval()
            return Next(self.negation(), interval)
        if self._at_ident("F"):
            self.ts.advance()
            interval = self.interval()
            return eventually(self.expression(), interval)
        left = self.expression()
        if not self._at_ident("U"):
            raise self.ts.error("expected a path formula (X, F or U)")
        self.ts.advance()
        interval = self.interval()
        return Until(left, self.expression(), interval)

    # -- model ---------------------------------------------------------------

    def model(self) -> ModelAst:
        ts = self.ts
        model_type = "ctmc"
        if ts.at("ctmc") or ts.at("stochastic"):
            ts.advance()
        constants, globals_, modules, rewards, labels = [], [], [], [], []
        while not ts.at_kind("EOF"):
            if ts.at("const"):
                constants.append(self.constant())
            elif ts.at("global"):
                ts.advance()
                globals_.append(self.variable())
            elif ts.at("module"):
                modules.append(self.module())
            elif ts.at("rewards"):
                rewards.append(self.rewards(len(rewards)))
            elif ts.at("label"):
                labels.append(self.label())
            else:
                raise ts.error("expected 'const', 'global', 'module', 'rewards' or 'label'")
        return ModelAst(tuple(constants), tuple(globals_), tuple(modules), tuple(rewards), tuple(labels), model_type)

    def constant(self) -> ConstantDecl:
        start = self.ts.expect("const")
        ctype = "int"
        for t in ("int", "double", "bool"):
            if self.ts.accept(t):
                ctype = t
                break
        name = self.ts.expect_kind("IDENT", "constant name")
        value = None
        if self.ts.accept("="):
            value = self.expression()
        self.ts.expect(";")
        return ConstantDecl(name.text, ctype, value, _loc(start))

    def variable(self) -> VariableDecl:
        name = self.ts.expect_kind("IDENT", "variable name")
        self.ts.expect(":")
        self.ts.expect("[")
        low = self.expression()
        self.ts.expect("..")
        high = self.expression()
        self.ts.expect("]")
        init = None
        if self.ts.accept("init"):
            init = self.expression()
        self.ts.expect(";")
        return VariableDecl(name.text, low, high, init, _loc(name))

    def module(self) -> Module:
        start = self.ts.expect("module")
        name = self.ts.expect_kind("IDENT", "module name")
        variables, commands = [], []
        while self.ts.at_kind("IDENT") and self.ts.peek().text == ":":
            variables.append(self.variable())
        while self.ts.at("["):
            commands.append(self.command())
        self.ts.expect("endmodule")
        return Module(name.text, tuple(variables), tuple(commands), _loc(start))

    def _action(self) -> str | None:
        self.ts.expect("[")
        action = None
        if self.ts.at_kind("IDENT"):
            action = self.ts.advance().text
        self.ts.expect("]")
        return action

    def command(self) -> Command:
        start = self.ts.current
        action = self._action()
        guard = self.expression()
        self.ts.expect("->")
        updates = [self.alternative()]
        while self.ts.accept("+"):
            updates.append(self.alternative())
        self.ts.expect(";")
        return Command(action, guard, tuple(updates), _loc(start))

    def alternative(self) -> Update:
        ts = self.ts
        if (ts.at("(") and ts.peek().kind == "PRIMED") or (ts.at("true") and ts.peek().text in (";", "+")):
            return Update(Literal(1), self.assignments())
        rate = self.expression()
        ts.expect(":")
        return Update(rate, self.assignments())

    def assignments(self) -> tuple[tuple[str, Expr], ...]:
        if self.ts.accept("true"):
            return ()
        out = [self.assignment()]
        while self.ts.accept("&"):
            out.append(self.assignment())
        return tuple(out)

    def assignment(self) -> tuple[str, Expr]:
        self.ts.expect("(")
        target = self.ts.expect_kind("PRIMED", "primed variable x'")
        self.ts.expect("=")
        value = self.expression()
        self.ts.expect(")")
        return target.text[:-1], value

    def rewards(self, index: int) -> RewardDecl:
        start = self.ts.expect("rewards")
        name = str(index)
        if self.ts.at_kind("STRING"):
            name = self.ts.advance().text[1:-1]
        items = []
        while not self.ts.at("endrewards"):
            tok = self.ts.current
            if tok.kind == "EOF":
                raise self.ts.error("expected 'endrewards'")
            transition, action = False, None
            if self.ts.at("["):
                transition = True
                action = self._action()
            guard = self.expression()
            self.ts.expect(":")
            value = self.expression()
            self.ts.expect(";")
            items.append(RewardItem(guard, value, transition, action, _loc(tok)))
        self.ts.expect("endrewards")
        return RewardDecl(name, tuple(items), _loc(start))

    def label(self) -> LabelDecl:
        start = self.ts.expect("label")
        name = self.ts.expect_kind("STRING", "label name")
        self.ts.expect("=")
        expr = self.expression()
        self.ts.expect(";")
        return LabelDecl(name.text[1:-1], expr, _loc(start))


def parse_expression(source: str) -> Expr:
    p = _Parser(source)
    expr = p.expression()
    p.ts.expect_kind("EOF", "end of expression")
    return expr


def parse_model(source: str) -> ModelAst:
    """Parse and statically validate a model description."""
    ast = _Parser(source).model()
    validate.check_model(ast)
    return ast


def parse_property(source: str) -> Expr:
    p = _Parser(source, properties=True)
    expr = p.expression()
    p.ts.accept(";")
    p.ts.expect_kind("EOF", "end of property")
    validate.check_property(expr)
    return expr


def parse_properties(source: str) -> list[Expr]:
    """One property per non-blank line; ``//`` starts a comment."""
    out = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        text = line.split("//", 1)[0].strip()
        if not text:
            continue
        try:
            out.append(parse_property(text))
        except ParseError as err:
            raise ParseError(err.message, lineno, err.column) from None
        except ModelError as err:
            raise ModelError(err.message, lineno, err.column or 1) from None
    return out
